#ifndef MFF_METRICS_HPP
#define MFF_METRICS_HPP

#include <string>
#include <vector>

#include "mff/model.hpp"

namespace mff {

struct ClassMetrics {
    double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct MetricsReport {
    std::string name;
    double accuracy = 0.0;
    ClassMetrics fake, real;
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;  // fake = positive class
    double threshold = 0.5;
};

/// Counts from (label, prediction) pairs; fake (label 1) is the positive
/// class, predicted fake when y' >= threshold. Zero-denominator precision,
/// recall, and F1 are defined as 0.
MetricsReport compute_metrics(const std::vector<std::pair<int, double>>& labeled_predictions,
                              double threshold = 0.5, const std::string& name = "");

MetricsReport evaluate(const ModelParams& model, const Dataset& dataset,
                       double threshold = 0.5, const std::string& name = "");

/// Fixed-width table: Accuracy | fake P/R/F1 | real P/R/F1, three decimals.
std::string render_report(const std::vector<MetricsReport>& reports);

std::string report_to_json(const MetricsReport& report);

} // namespace mff

#endif
