#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "afc/generative.hpp"
#include "afc/kmer_features.hpp"

namespace afc {

enum class Loss { Logistic, SquaredHinge };

struct Penalty {
    enum class Kind { L1, L2 };

    Kind kind = Kind::L2;
    double lambda = 1.0;  // regularization rate
    double cost = 1.0;    // C, multiplies the summed loss

    static Penalty l1(double lambda = 1.0, double cost = 1.0);
    static Penalty l2(double lambda = 1.0, double cost = 1.0);
    bool operator==(const Penalty&) const = default;
};

enum class SolverMethod {
    // Orthant-wise truncated Newton: conjugate-gradient Newton steps on the
    // free coordinates, projected onto the orthant of the iterate.
    Newton,
    // Monotone accelerated proximal gradient with backtracking.
    ProximalGradient,
};

// "newton" or "proximal"; parse throws ConfigError on anything else.
std::string solver_name(SolverMethod method);
SolverMethod parse_solver(const std::string& name);

struct SolverOptions {
    double tol = 1e-4;  // relative objective decrease
    // Stationarity: the minimum-norm subgradient for Newton, the
    // proximal gradient mapping for ProximalGradient. The first bounds the
    // second, so both certify the same condition.
    double grad_tol = 1e-3;
    int max_iter = 1000;
    SolverMethod method = SolverMethod::Newton;
    bool keep_trace = false;  // record the objective after every iteration
};

// Row-compressed design matrix over dense feature columns.
struct SparseDesign {
    std::size_t cols = 0;
    std::vector<std::size_t> row_start{0};
    std::vector<std::uint32_t> col;
    std::vector<double> value;

    std::size_t rows() const noexcept { return row_start.size() - 1; }
    void add_row(std::span<const std::pair<std::uint32_t, double>> entries);
    double row_dot(std::size_t row, std::span<const double> weights) const noexcept;

    static SparseDesign from_dense(const std::vector<std::vector<double>>& rows);
};

// Sorted k-mer codes seen at training time; column j holds codes[j].
struct FeatureIndex {
    std::vector<KmerCode> codes;

    static FeatureIndex from_profiles(const std::vector<KmerProfile>& rows);
    std::size_t size() const noexcept { return codes.size(); }
    std::optional<std::uint32_t> column(KmerCode code) const noexcept;

    // Maps a profile onto the columns; codes absent from the index are dropped.
    std::vector<std::pair<std::uint32_t, double>> map(const KmerProfile& profile) const;
    SparseDesign design(const std::vector<KmerProfile>& rows) const;
};

struct BinaryLinearModel {
    std::vector<double> weights;
    double intercept = 0.0;
    Loss loss = Loss::Logistic;
    Penalty penalty;
    bool converged = false;
    int iterations = 0;
    double objective = 0.0;
    std::vector<double> trace;  // filled when SolverOptions::keep_trace

    double decision(std::span<const std::pair<std::uint32_t, double>> features) const noexcept;
    std::size_t nonzeros() const noexcept;
};

// C * sum loss(t * (w.x + b)) + lambda * R(w); the intercept is not penalized.
double objective(const SparseDesign& x, std::span<const double> targets,
                 std::span<const double> weights, double intercept, Loss loss,
                 const Penalty& penalty);

// Gradient of the differentiable part: the loss term, plus lambda*||w||^2
// for L2. Layout is [d/dw_0 .. d/dw_{n-1}, d/db].
std::vector<double> smooth_gradient(const SparseDesign& x, std::span<const double> targets,
                                    std::span<const double> weights, double intercept, Loss loss,
                                    const Penalty& penalty);

// Smallest L1 rate at which w = 0 is optimal.
double l1_lambda_max(const SparseDesign& x, std::span<const double> targets, Loss loss,
                     double cost);

// Minimizes the objective with the method in `options`. Both methods are
// monotone in the objective. Targets are +1/-1 and both must occur.
BinaryLinearModel fit_binary(const SparseDesign& x, std::span<const double> targets, Loss loss,
                             const Penalty& penalty, const SolverOptions& options = {});

struct OneVsRestModel {
    KmerSpec spec{1};
    std::vector<std::string> classes;
    Loss loss = Loss::Logistic;
    Penalty penalty;
    SolverOptions options;
    FeatureIndex features;
    std::vector<BinaryLinearModel> models;  // one per class
};

OneVsRestModel fit_ovr(const ProfileMatrix& matrix, Loss loss, const Penalty& penalty,
                       const SolverOptions& options = {}, std::size_t workers = 1);

// w_j . x + b_j per class.
std::vector<double> decision_function(const OneVsRestModel& model, const KmerProfile& profile);

std::vector<Prediction> predict(const OneVsRestModel& model, const ProfileMatrix& matrix);

}  // namespace afc
