#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skewlin/kernels.hpp"
#include "skewlin/torus.hpp"

namespace skewlin {

struct NormReport {
    double c_norm = 0.0;
    double lip_x = 0.0;
    double holder_alpha = 0.0;
    double holder_norm = 0.0;
    int n_pairs = 0;
    std::vector<std::pair<double, double>> per_scale;  // (scale, max ratio)
    std::vector<std::string> warnings;
};

/// Values of a function T^d x [0, eps] -> R on a uniform grid: nb nodes per
/// torus dimension (periodic), nx nodes on [0, eps] including both ends.
/// Storage is b-major with the x direction contiguous. Immutable by
/// convention once filled; all queries are const and re-entrant.
class GridFunction {
public:
    GridFunction(int dim, int nb, int nx, double epsilon);

    template <class F>
    static GridFunction from_evaluator(int dim, int nb, int nx, double epsilon, F&& fn,
                                       kernels::Mode mode = kernels::default_mode()) {
        GridFunction g(dim, nb, nx, epsilon);
        kernels::tabulate(
            g.data(),
            [&](std::size_t flat) {
                const std::size_t bf = flat / static_cast<std::size_t>(g.nx_);
                const int xi = static_cast<int>(flat % static_cast<std::size_t>(g.nx_));
                return fn(g.node_point(bf), g.x_node(xi));
            },
            mode);
        return g;
    }

    int dim() const { return dim_; }
    int nb() const { return nb_; }
    int nx() const { return nx_; }
    double epsilon() const { return eps_; }
    std::size_t b_count() const { return b_count_; }
    std::size_t size() const { return v_.size(); }
    double x_step() const { return dx_; }
    double x_node(int i) const { return dx_ * i; }

    double value(std::size_t b_flat, int xi) const {
        return v_[b_flat * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(xi)];
    }
    double& value(std::size_t b_flat, int xi) {
        return v_[b_flat * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(xi)];
    }
    std::span<double> data() { return v_; }
    std::span<const double> data() const { return v_; }

    void node_indices(std::size_t b_flat, std::span<int> out) const;
    TorusPoint node_point(std::size_t b_flat) const;

    /// Multilinear interpolation, periodic in b, piecewise linear in x.
    /// Exact at grid nodes. Throws ValidationError when x is outside
    /// [0, eps] by more than 1e-12 (closer excursions are clamped).
    double eval(const TorusPoint& b, double x) const;

    /// Linear interpolation along x within one b-column (no b interpolation).
    double eval_on_column(std::size_t b_flat, double x) const;

    // --- the three norms ---------------------------------------------------
    double c_norm(kernels::Mode mode = kernels::default_mode()) const;
    double lipschitz_x(kernels::Mode mode = kernels::default_mode()) const;
    NormReport holder_norm(double alpha, int n_pairs, std::span<const double> scales,
                           std::uint64_t seed,
                           kernels::Mode mode = kernels::default_mode()) const;

    // --- serialization (both round-trip bit-exactly) -----------------------
    void write_csv(const std::filesystem::path& path) const;
    static GridFunction read_csv(const std::filesystem::path& path);
    void write_binary(const std::filesystem::path& bin_path,
                      const std::filesystem::path& meta_path) const;
    static GridFunction read_binary(const std::filesystem::path& bin_path,
                                    const std::filesystem::path& meta_path);

private:
    int dim_, nb_, nx_;
    double eps_, dx_;
    std::size_t b_count_;
    std::vector<double> v_;
};

}  // namespace skewlin
