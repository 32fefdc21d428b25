#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "skewlin/solver.hpp"

namespace skewlin {

/// The exponent bookkeeping: alpha must sit below both the fiber Holder
/// exponent beta and log_mu(1/q), which is exactly theta = mu^alpha q < 1.
struct AlphaTheta {
    double beta = 1.0;
    double mu = 0.0;
    double q = 0.0;
    double D = 0.0;
    double alpha_max = 0.0;  // min(beta, log(1/q)/log(mu))
    double alpha = 0.0;      // chosen, < alpha_max
    double theta = 0.0;      // mu^alpha q

    /// alpha <= 0 picks the default 0.9 * alpha_max. Throws ValidationError
    /// naming theta >= 1 (or the beta cap) when alpha is out of range.
    static AlphaTheta make(double beta, double mu, double q, double D, double alpha = 0.0);
};

struct BoundCheck {
    std::string name;
    int n = 0;           // series index, 0 when not applicable
    double theoretical = 0.0;
    double measured = 0.0;
    double slack = 0.0;  // multiplicative
    bool pass = false;
    /// The bound exactly as printed in the source text when it differs from
    /// the corrected reading used for `theoretical` (0 otherwise).
    double as_printed = 0.0;
};

struct HolderEstimate {
    bool exact_in_b = false;
    double alpha_hat = 0.0;
    /// (scale, max |h(b1,x) - h(b2,x)|, max ratio over dist^alpha)
    struct Row {
        double scale, max_diff, max_ratio;
    };
    std::vector<Row> table;
};

/// Explicit constants of the homological operator's Holder estimate,
/// with the 1/D readings.
struct TheoryConstants {
    double B = 0.0;
    double L_C = 0.0, L_alpha = 0.0, L_Lip = 0.0;
    double C_h = 0.0;  // ||Q||_C L_C + C_Q L_alpha + Lip_x Q L_Lip
    double C_lambda = 0.0, C_Q = 0.0, Lip_Q = 0.0;  // measured inputs
};

struct VerificationReport {
    double conjugacy_residual = 0.0;
    std::optional<double> oracle_error;
    HolderEstimate holder;
    std::vector<BoundCheck> bound_checks;
    TheoryConstants constants;
    bool narrow_band = false;
};

/// sup |f_b(H_b(x)) - H_{Ab}(lambda_b x)| over a verification grid twice as
/// fine as (nb, nx) plus `n_random` seeded off-grid samples.
double conjugacy_residual(const SkewProduct& f,
                          const std::function<double(const TorusPoint&, double)>& h_fiber,
                          int nb, int nx, double epsilon, int n_random = 10000,
                          std::uint64_t seed = 0xc0117e57);

/// Koenigs linearization of a 1-d map f with f(0) = 0, 0 < f'(0) = lambda < 1:
/// computes phi(x) = lim lambda^-n f^n(x) (with a Richardson consistency
/// check) and returns H(x) = phi^{-1}(x) by bisection. Satisfies
/// f(H(x)) = H(lambda x) to ~1e-9. Throws ModelError on non-convergence.
double koenigs_oracle(const std::function<double(double)>& f, double lambda, double x);

/// Per-scale maxima of |h_{b1}(x) - h_{b2}(x)| and the log-log slope fit.
/// Reports exact_in_b instead of a slope when the differences vanish.
/// Throws ValidationError when fewer than 3 scales are usable.
HolderEstimate estimate_holder(const GridFunction& h, const AlphaTheta& at,
                               std::span<const double> scales, int n_pairs,
                               std::uint64_t seed = 0xa1fa);

struct BoundCheckOptions {
    int depth = 10;
    int n_pairs = 10000;
    std::vector<double> scales = {0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
    std::uint64_t seed = 0xb0a2d;
    double slack_holder = 0.10;
    double slack_operator = 1e-6;
    double slack_lipschitz = 0.05;
    double epsilon = 0.1;  // grid domain for the operator-norm trials
};

/// Empirical checks of the cocycle Holder bounds (Pi_n, P_n, theta_2k for
/// n = 1..depth), the operator norm of L on random grid functions, Lipschitz
/// transport, and derivative transport (l = 1, 2). Failures are report rows,
/// not exceptions.
std::vector<BoundCheck> check_bounds(const SkewProduct& f, const AlphaTheta& at,
                                     const BoundCheckOptions& opts, TheoryConstants* out_constants = nullptr);

/// Narrow band spectrum condition q^2 < D. Informational only; nothing in
/// the pipeline requires it.
bool narrow_band_check(const MultiplierBounds& bounds);

/// Measured Lipschitz-proxy Holder data of the multiplier and quadratic part;
/// feeds the theoretical curves above.
TheoryConstants measure_constants(const SkewProduct& f, const AlphaTheta& at, int n_pairs,
                                  std::uint64_t seed);

}  // namespace skewlin
