#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace skewlin {

inline constexpr int kMaxDim = 6;

/// A point on the d-torus. Every coordinate is kept in [0,1).
class TorusPoint {
public:
    TorusPoint() = default;
    TorusPoint(std::initializer_list<double> coords);
    explicit TorusPoint(std::span<const double> coords);

    static TorusPoint zero(int dim);

    int dim() const { return dim_; }
    double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
    std::span<const double> coords() const { return {c_.data(), static_cast<std::size_t>(dim_)}; }

    /// Reduce a real number into [0,1). The result is never 1.0, even for
    /// inputs a hair below an integer where floor-subtraction rounds up.
    static double reduce(double x);

private:
    std::array<double, kMaxDim> c_{};
    int dim_ = 0;
};

/// Quotient Euclidean metric: ||b1 - b2|| minimized over integer shifts of b2.
double torus_distance(const TorusPoint& b1, const TorusPoint& b2);

/// Linear hyperbolic automorphism of the d-torus, given by an integer matrix
/// with |det| = 1 and no eigenvalue of modulus 1. Immutable after construction.
class ToralAutomorphism {
public:
    /// `entries` is row-major d x d. Throws ValidationError if the matrix is
    /// not unimodular or not hyperbolic (some |eigenvalue| within 1e-9 of 1).
    ToralAutomorphism(std::vector<std::int64_t> entries, int dim);

    /// Arnold's cat map [[2,1],[1,1]], the default base everywhere.
    static ToralAutomorphism cat_map();

    int dim() const { return dim_; }
    double spectral_radius() const { return mu_; }
    std::int64_t entry(int r, int c) const { return m_[static_cast<std::size_t>(r * dim_ + c)]; }
    std::span<const std::int64_t> entries() const { return m_; }

    TorusPoint apply(const TorusPoint& b) const;
    TorusPoint iterate(const TorusPoint& b, int k) const;

    /// Action on the uniform n-grid in exact integer arithmetic:
    /// out_r = sum_c entry(r,c) * in_c  (mod n). Grid nodes map to grid nodes.
    void apply_index(std::span<const std::int64_t> in, std::span<std::int64_t> out,
                     std::int64_t n) const;

private:
    std::vector<std::int64_t> m_;
    int dim_ = 0;
    double mu_ = 0.0;
};

}  // namespace skewlin
