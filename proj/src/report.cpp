#include "afc/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <json.hpp>

namespace afc {

using nlohmann::json;

namespace {

std::string loss_name(const ModelConfig& m) {
    if (m.generative()) return "";
    return m.loss() == Loss::Logistic ? "logistic" : "squared_hinge";
}

std::string penalty_name(const ModelConfig& m) {
    if (m.generative()) return "";
    return m.penalty.kind == Penalty::Kind::L1 ? "L1" : "L2";
}

std::string alpha_field(const ModelConfig& m) {
    if (!m.generative()) return "";
    return m.policy.is_mle() ? "MLE" : fmt::format("{}", m.policy.alpha);
}

std::string model_fields(const ModelConfig& m) {
    const std::string cost = m.generative() ? "" : fmt::format("{}", m.penalty.cost);
    const std::string lambda = m.generative() ? "" : fmt::format("{}", m.penalty.lambda);
    return fmt::format("{},{},{},{},{},{}", m.id(), loss_name(m), penalty_name(m), alpha_field(m),
                       cost, lambda);
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

json model_json(const ModelConfig& m) {
    json j = {{"id", m.id()}, {"family", family_name(m.family)}};
    if (m.generative()) {
        j["smoothing"] = m.policy.is_mle() ? json("MLE") : json(m.policy.alpha);
    } else {
        j["loss"] = loss_name(m);
        j["penalty"] = penalty_name(m);
        j["C"] = m.penalty.cost;
        j["lambda"] = m.penalty.lambda;
        j["tol"] = m.solver.tol;
        j["grad_tol"] = m.solver.grad_tol;
        j["max_iter"] = m.solver.max_iter;
        j["solver"] = solver_name(m.solver.method);
    }
    return j;
}

}  // namespace

void write_fold_csv(std::ostream& out, const ExperimentReport& report) {
    out << "model,loss,penalty,alpha,C,lambda,k,fragment_length,fold,weighted_precision,"
           "weighted_recall,weighted_f,seed,error\n";
    for (const auto& cell : report.cells) {
        out << model_fields(cell.model) << ',' << cell.k << ',' << cell.fragment_length << ','
            << cell.fold << ',';
        if (cell.metrics) {
            out << fmt::format("{},{},{}", cell.metrics->precision, cell.metrics->recall,
                               cell.metrics->f_measure);
        } else {
            out << ",,";
        }
        out << ',' << report.seed << ',' << csv_escape(cell.error) << '\n';
    }
}

void write_aggregate_csv(std::ostream& out, const ExperimentReport& report) {
    out << "model,loss,penalty,alpha,C,lambda,k,fragment_length,f_mean,f_std,n_folds\n";
    for (const auto& agg : report.aggregates) {
        out << model_fields(agg.model) << ',' << agg.k << ',' << agg.fragment_length << ',';
        if (agg.n_folds > 0) {
            out << fmt::format("{},{}", agg.f_mean, agg.f_std);
        } else {
            out << ',';
        }
        out << ',' << agg.n_folds << '\n';
    }
}

std::string report_json(const ExperimentReport& report) {
    json models = json::array();
    for (const auto& m : report.models) models.push_back(model_json(m));

    json cells = json::array();
    for (const auto& cell : report.cells) {
        json c = {{"model", cell.model.id()},
                  {"k", cell.k},
                  {"fragment_length", cell.fragment_length},
                  {"fold", cell.fold},
                  {"test_items", cell.truth.size()},
                  {"fallback_predictions", cell.fallback_predictions}};
        if (cell.metrics) {
            const auto& m = *cell.metrics;
            c["weighted_precision"] = m.precision;
            c["weighted_recall"] = m.recall;
            c["weighted_f"] = m.f_measure;
            c["class_f"] = m.class_f;
            c["support"] = m.support;
        } else {
            c["error"] = cell.error;
        }
        cells.push_back(std::move(c));
    }

    json aggregates = json::array();
    for (const auto& agg : report.aggregates) {
        aggregates.push_back({{"model", agg.model.id()},
                              {"k", agg.k},
                              {"fragment_length", agg.fragment_length},
                              {"f_mean", agg.f_mean},
                              {"f_std", agg.f_std},
                              {"n_folds", agg.n_folds},
                              {"failed_folds", agg.failed_folds}});
    }

    json doc = {{"metadata",
                 {{"dataset_digest", report.dataset_digest},
                  {"seed", report.seed},
                  {"k_min", report.k_min},
                  {"k_max", report.k_max},
                  {"n_folds", report.n_folds},
                  {"fragment_lengths", report.fragment_lengths},
                  {"max_per_class", report.max_per_class},
                  {"classes", report.classes},
                  {"std_convention", "sample (n-1) standard deviation over folds"},
                  {"fragment_sampling",
                   "seeded uniform offsets without replacement, drawn per fold from held-out genomes"},
                  {"ambiguous_bases", "k-mer windows containing non-ACGT bytes are skipped"},
                  {"models", models},
                  {"warnings", report.warnings}}},
                {"aggregates", aggregates},
                {"cells", cells}};
    return doc.dump(1) + "\n";
}

void write_svg(std::ostream& out, const ExperimentReport& report, std::size_t fragment_length) {
    constexpr double kWidth = 760, kHeight = 420;
    constexpr double kLeft = 60, kRight = 180, kTop = 30, kBottom = 50;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const int k_span = std::max(1, report.k_max - report.k_min);
    auto x_of = [&](int k) { return kLeft + plot_w * (k - report.k_min) / k_span; };
    auto y_of = [&](double f) { return kTop + plot_h * (1.0 - std::clamp(f, 0.0, 1.0)); };

    static constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                               "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                               "#bcbd22", "#17becf"};

    out << fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
        "font-family=\"sans-serif\" font-size=\"11\">\n",
        kWidth, kHeight);
    out << fmt::format("<text x=\"{}\" y=\"18\">Mean weighted F-measure, {}</text>\n", kLeft,
                       fragment_length == 0 ? std::string("complete genomes")
                                            : fmt::format("{} bp fragments", fragment_length));
    out << fmt::format(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n",
        kLeft, kTop, plot_w, plot_h);
    for (int i = 0; i <= 4; ++i) {
        const double f = i / 4.0;
        out << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.2f}</text>\n", kLeft - 6,
                           y_of(f) + 4, f);
    }
    for (int k = report.k_min; k <= report.k_max; ++k) {
        out << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", x_of(k),
                           kTop + plot_h + 16, k);
    }
    out << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">k</text>\n",
                       kLeft + plot_w / 2, kHeight - 10);

    std::size_t series = 0;
    for (const auto& model : report.models) {
        std::vector<const AggregateRecord*> points;
        for (const auto& agg : report.aggregates) {
            if (agg.fragment_length == fragment_length && agg.model.id() == model.id() &&
                agg.n_folds > 0) {
                points.push_back(&agg);
            }
        }
        if (points.empty()) continue;
        const char* colour = kPalette[series % std::size(kPalette)];
        std::string band, line;
        for (const auto* p : points) band += fmt::format("{:.1f},{:.1f} ", x_of(p->k), y_of(p->f_mean + p->f_std));
        for (auto it = points.rbegin(); it != points.rend(); ++it) {
            band += fmt::format("{:.1f},{:.1f} ", x_of((*it)->k), y_of((*it)->f_mean - (*it)->f_std));
        }
        for (const auto* p : points) line += fmt::format("{:.1f},{:.1f} ", x_of(p->k), y_of(p->f_mean));
        out << fmt::format("<polygon points=\"{}\" fill=\"{}\" fill-opacity=\"0.15\" stroke=\"none\"/>\n",
                           band, colour);
        out << fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                           line, colour);
        const double legend_y = kTop + 14.0 * static_cast<double>(series);
        out << fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                           kLeft + plot_w + 10, legend_y + 6, kLeft + plot_w + 28, legend_y + 6, colour);
        out << fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", kLeft + plot_w + 32, legend_y + 10,
                           model.id());
        ++series;
    }
    out << "</svg>\n";
}

std::string format_k_ranges(const std::vector<int>& ks) {
    std::string out;
    for (std::size_t i = 0; i < ks.size();) {
        std::size_t j = i;
        while (j + 1 < ks.size() && ks[j + 1] == ks[j] + 1) ++j;
        if (!out.empty()) out += ',';
        out += j == i ? std::to_string(ks[i]) : fmt::format("{}-{}", ks[i], ks[j]);
        i = j + 1;
    }
    return out;
}

std::vector<ExtremeRow> best_and_worst(const ExperimentReport& report) {
    std::vector<ExtremeRow> rows;
    for (std::size_t len : report.fragment_lengths) {
        for (const auto& model : report.models) {
            std::vector<const AggregateRecord*> points;
            for (const auto& agg : report.aggregates) {
                if (agg.fragment_length == len && agg.model.id() == model.id() && agg.n_folds > 0) {
                    points.push_back(&agg);
                }
            }
            if (points.empty()) continue;
            auto rounded = [](double f) { return std::round(f * 1000.0); };
            ExtremeRow row;
            row.model = model.id();
            row.fragment_length = len;
            double best = -1, worst = 2e3;
            for (const auto* p : points) {
                best = std::max(best, rounded(p->f_mean));
                worst = std::min(worst, rounded(p->f_mean));
            }
            for (const auto* p : points) {
                if (rounded(p->f_mean) == best) {
                    if (row.best_k.empty()) {
                        row.best_mean = p->f_mean;
                        row.best_std = p->f_std;
                    }
                    row.best_k.push_back(p->k);
                }
                if (rounded(p->f_mean) == worst) {
                    if (row.worst_k.empty()) {
                        row.worst_mean = p->f_mean;
                        row.worst_std = p->f_std;
                    }
                    row.worst_k.push_back(p->k);
                }
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_best_table(std::ostream& out, const std::vector<ExtremeRow>& rows) {
    out << fmt::format("{:<16} {:>9}  {:<22} {:<8}  {:<22} {:<8}\n", "model", "fragment",
                       "best F", "k", "worst F", "k");
    for (const auto& r : rows) {
        const std::string fragment =
            r.fragment_length == 0 ? std::string("complete") : fmt::format("{} bp", r.fragment_length);
        out << fmt::format("{:<16} {:>9}  {:<22} {:<8}  {:<22} {:<8}\n", r.model, fragment,
                           fmt::format("{:.3f} +/- {:.3f}", r.best_mean, r.best_std),
                           format_k_ranges(r.best_k),
                           fmt::format("{:.3f} +/- {:.3f}", r.worst_mean, r.worst_std),
                           format_k_ranges(r.worst_k));
    }
}

}  // namespace afc
