#include "mff/metrics.hpp"

#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace mff {

namespace {

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : double(num) / double(den);
}

double f1_of(double p, double r) {
    return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

} // namespace

MetricsReport compute_metrics(const std::vector<std::pair<int, double>>& labeled_predictions,
                              double threshold, const std::string& name) {
    if (labeled_predictions.empty()) throw DataError("evaluate: empty dataset");
    MetricsReport r;
    r.name = name;
    r.threshold = threshold;
    for (const auto& [label, pred] : labeled_predictions) {
        const bool predicted_fake = pred >= threshold;
        if (label == 1)
            predicted_fake ? ++r.tp : ++r.fn;
        else
            predicted_fake ? ++r.fp : ++r.tn;
    }
    const std::size_t total = r.tp + r.fp + r.tn + r.fn;
    r.accuracy = ratio(r.tp + r.tn, total);
    r.fake.precision = ratio(r.tp, r.tp + r.fp);
    r.fake.recall = ratio(r.tp, r.tp + r.fn);
    r.fake.f1 = f1_of(r.fake.precision, r.fake.recall);
    r.real.precision = ratio(r.tn, r.tn + r.fn);
    r.real.recall = ratio(r.tn, r.tn + r.fp);
    r.real.f1 = f1_of(r.real.precision, r.real.recall);
    return r;
}

MetricsReport evaluate(const ModelParams& model, const Dataset& dataset, double threshold,
                       const std::string& name) {
    std::vector<std::pair<int, double>> preds;
    preds.reserve(dataset.samples.size());
    for (const auto& s : dataset.samples)
        preds.emplace_back(s.label, model_forward(s, model).item());
    return compute_metrics(preds, threshold, name);
}

std::string render_report(const std::vector<MetricsReport>& reports) {
    std::ostringstream os;
    std::size_t name_w = 10;
    for (const auto& r : reports) name_w = std::max(name_w, r.name.size() + 2);
    os << std::left << std::setw(int(name_w)) << "Method" << std::right
       << std::setw(10) << "Accuracy" << std::setw(12) << "Fake-P" << std::setw(8) << "R"
       << std::setw(8) << "F1" << std::setw(12) << "Real-P" << std::setw(8) << "R"
       << std::setw(8) << "F1" << '\n';
    os << std::fixed << std::setprecision(3);
    for (const auto& r : reports) {
        os << std::left << std::setw(int(name_w)) << r.name << std::right
           << std::setw(10) << r.accuracy << std::setw(12) << r.fake.precision
           << std::setw(8) << r.fake.recall << std::setw(8) << r.fake.f1
           << std::setw(12) << r.real.precision << std::setw(8) << r.real.recall
           << std::setw(8) << r.real.f1 << '\n';
    }
    return os.str();
}

std::string report_to_json(const MetricsReport& r) {
    nlohmann::json j{
        {"name", r.name},
        {"accuracy", r.accuracy},
        {"threshold", r.threshold},
        {"counts", {{"tp", r.tp}, {"fp", r.fp}, {"tn", r.tn}, {"fn", r.fn}}},
        {"fake", {{"precision", r.fake.precision}, {"recall", r.fake.recall}, {"f1", r.fake.f1}}},
        {"real", {{"precision", r.real.precision}, {"recall", r.real.recall}, {"f1", r.real.f1}}}};
    return j.dump(2);
}

} // namespace mff
