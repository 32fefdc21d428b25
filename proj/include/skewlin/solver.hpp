#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "skewlin/grid.hpp"
#include "skewlin/kernels.hpp"
#include "skewlin/skew.hpp"

namespace skewlin {

struct SolverConfig {
    double epsilon = 0.1;
    /// Chosen Holder exponent; <= 0 derives 0.9 * min(beta, log_mu(1/q))
    /// with beta = 1 unless the caller resolves it from family data first.
    double alpha = 0.0;
    /// Series depth; 0 derives the smallest N with
    /// ||Q||_C q^{N+1} / (D(1-q)) <= tail_tol, clamped to [8, 200].
    int truncation_N = 0;
    double tail_tol = 1e-10;
    double fixed_point_tol = 1e-10;
    int max_iterations = 60;
    int n_b = 64;
    int n_x = 33;
    std::uint64_t seed = 0x1d66d;
    /// Pair budget and scales for the in-space-N Holder trace.
    int trace_pairs = 2000;
    std::vector<double> trace_scales = {0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
};

/// Bounds defining the invariant set N: ||h||_C <= a_c, Lip_x h <= a_lip,
/// ||h||_[alpha] <= a_alpha. Zeros mean "choose defaults": a_c twice the
/// series bound ||Q||_C/(D(1-q)), the other two 10x the measured norms of
/// the first iterate.
struct SpaceNParams {
    double a_c = 0.0;
    double a_lip = 0.0;
    double a_alpha = 0.0;
};

struct SolverReport {
    int iterations = 0;
    double final_delta = 0.0;
    std::vector<double> contraction_estimates;  // nu_i = delta_{i+1}/delta_i
    double functional_residual = 0.0;           // via f itself, at solve nodes
    double homological_residual = 0.0;          // via Q/Phi, at solve nodes
    std::vector<bool> in_space_n;
    bool converged = false;
    std::string note;

    SpaceNParams n_params;
    double q = 0.0, D = 0.0, mu = 0.0, alpha = 0.0, theta = 0.0;
    double epsilon = 0.0;
    double q_norm = 0.0;  // ||Q||_C over the solve grid
    int truncation_N = 0;
};

/// Orbit data tabulated once per solve on the uniform b-grid: A^k as an exact
/// index permutation, lambda along orbits, cocycles Pi_k and P_k. Rows cover
/// k = 0 .. depth+1.
class OrbitTables {
public:
    static OrbitTables build(const ToralAutomorphism& base,
                             const std::function<double(const TorusPoint&)>& lambda, int nb,
                             int depth, kernels::Mode mode = kernels::default_mode());

    int nb_count() const { return nb_; }
    int dim() const { return dim_; }
    int depth() const { return depth_; }
    std::size_t nodes() const { return nbd_; }

    const std::uint32_t* perm_row(int k) const { return perm_.data() + row(k); }
    const double* lambda_row(int k) const { return lam_.data() + row(k); }
    const double* pi_row(int k) const { return pi_.data() + row(k); }
    const double* p_row(int k) const { return p_.data() + row(k); }
    const TorusPoint& point(std::size_t flat) const { return pts_[flat]; }

private:
    std::size_t row(int k) const { return static_cast<std::size_t>(k) * nbd_; }

    int nb_ = 0, dim_ = 0, depth_ = 0;
    std::size_t nbd_ = 0;
    std::vector<std::uint32_t> perm_;
    std::vector<double> lam_, pi_, p_;
    std::vector<TorusPoint> pts_;
};

using FiberQ = std::function<double(const TorusPoint&, double)>;

/// Truncated series solution of the homological equation
/// lambda^2 h(Ab, lambda_b x) - lambda_b h(b, x) = Q(b, x):
/// h = -sum_{k<=N} P_k(b) Q(F0^k(b,x)), Q evaluated exactly along orbits.
GridFunction homological_solve(const FiberQ& q_eval, const LinearizedSkewProduct& f0,
                               const SolverConfig& cfg);

/// The homological operator applied to a grid function (x-interpolated along
/// orbits; the base moves exactly on the grid).
GridFunction apply_homological_to_grid(const GridFunction& q, const LinearizedSkewProduct& f0,
                                       const SolverConfig& cfg);

/// Node-wise normalized shift operator Phi h = (1 + x h)^2 Q(b, x + x^2 h).
/// Throws ModelError naming the node when x + x^2 h leaves [0,1].
GridFunction shift_apply(const GridFunction& h, const FiberQ& q_eval);

/// Picard iteration for the fixed point of L Phi from h0 = 0. Reports
/// contraction estimates, space-N membership per iterate, and both residuals.
std::pair<GridFunction, SolverReport> solve_conjugacy(const SkewProduct& f,
                                                      const SolverConfig& cfg,
                                                      const SpaceNParams& np = {});

/// Series transport of the l-th fiber derivative:
/// (Lh)^(l) = -sum_k P_k(b) Pi_k(b)^l h_l(F0^k(b,x)).
GridFunction derivative_transport(const GridFunction& h_l, int l,
                                  const LinearizedSkewProduct& f0, const SolverConfig& cfg,
                                  int smoothness_k);

/// The conjugacy H(b,x) = (b, x + x^2 h_b(x)) assembled from a solved grid.
class Conjugacy {
public:
    explicit Conjugacy(GridFunction h) : h_(std::move(h)) {}

    double fiber(const TorusPoint& b, double x) const { return x + x * x * h_.eval(b, x); }
    std::pair<TorusPoint, double> operator()(const TorusPoint& b, double x) const {
        return {b, fiber(b, x)};
    }
    const GridFunction& h() const { return h_; }

private:
    GridFunction h_;
};

inline Conjugacy assemble_H(GridFunction h) { return Conjugacy(std::move(h)); }

/// Shared validation: throws unless q < 1 (else "globalization required")
/// and theta = mu^alpha q < 1 (named in the message). Returns theta.
double require_contraction_setup(double mu, double alpha, double q);

/// N from the geometric tail bound, clamped to [8, 200].
int derive_truncation(double tail_tol, double q, double D, double q_norm);

}  // namespace skewlin
