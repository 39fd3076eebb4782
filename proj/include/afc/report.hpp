#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "afc/evaluation.hpp"

namespace afc {

// model,loss,penalty,alpha,C,lambda,k,fragment_length,fold,
// weighted_precision,weighted_recall,weighted_f,seed,error
void write_fold_csv(std::ostream& out, const ExperimentReport& report);

// model,loss,penalty,alpha,C,lambda,k,fragment_length,f_mean,f_std,n_folds
void write_aggregate_csv(std::ostream& out, const ExperimentReport& report);

// Full report including metadata, per-class metrics and aggregates.
std::string report_json(const ExperimentReport& report);

// Mean weighted F against k, one polyline per model with a +/- std band.
void write_svg(std::ostream& out, const ExperimentReport& report, std::size_t fragment_length);

// Best and worst mean weighted F per model and fragment setting, with the
// k values reaching them (scores compared at three decimals).
struct ExtremeRow {
    std::string model;
    std::size_t fragment_length = 0;
    double best_mean = 0.0, best_std = 0.0;
    std::vector<int> best_k;
    double worst_mean = 0.0, worst_std = 0.0;
    std::vector<int> worst_k;
};

std::vector<ExtremeRow> best_and_worst(const ExperimentReport& report);
void write_best_table(std::ostream& out, const std::vector<ExtremeRow>& rows);

// "9-15" for contiguous runs, "4,6-8" otherwise.
std::string format_k_ranges(const std::vector<int>& ks);

}  // namespace afc
