#include "skewlin/torus.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "skewlin/errors.hpp"

namespace skewlin {

namespace {

void check_dim(int dim) {
    if (dim < 1 || dim > kMaxDim) {
        std::ostringstream os;
        os << "torus dimension " << dim << " outside [1, " << kMaxDim << "]";
        throw ValidationError(os.str());
    }
}

/// Exact integer determinant by fraction-free Gaussian elimination (Bareiss).
std::int64_t integer_determinant(std::vector<std::int64_t> a, int n) {
    std::int64_t prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (a[static_cast<std::size_t>(k * n + k)] == 0) {
            int p = -1;
            for (int r = k + 1; r < n; ++r)
                if (a[static_cast<std::size_t>(r * n + k)] != 0) { p = r; break; }
            if (p < 0) return 0;
            for (int c = 0; c < n; ++c)
                std::swap(a[static_cast<std::size_t>(k * n + c)],
                          a[static_cast<std::size_t>(p * n + c)]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j) {
                std::int64_t v = a[static_cast<std::size_t>(i * n + j)] *
                                     a[static_cast<std::size_t>(k * n + k)] -
                                 a[static_cast<std::size_t>(i * n + k)] *
                                     a[static_cast<std::size_t>(k * n + j)];
                a[static_cast<std::size_t>(i * n + j)] = v / prev;
            }
        prev = a[static_cast<std::size_t>(k * n + k)];
    }
    return sign * a[static_cast<std::size_t>((n - 1) * n + (n - 1))];
}

}  // namespace

double TorusPoint::reduce(double x) {
    double r = x - std::floor(x);
    if (r >= 1.0) r -= 1.0;
    if (r < 0.0) r = 0.0;
    return r;
}

TorusPoint::TorusPoint(std::initializer_list<double> coords)
    : TorusPoint(std::span<const double>(coords.begin(), coords.size())) {}

TorusPoint::TorusPoint(std::span<const double> coords) {
    check_dim(static_cast<int>(coords.size()));
    dim_ = static_cast<int>(coords.size());
    for (int i = 0; i < dim_; ++i) c_[static_cast<std::size_t>(i)] = reduce(coords[static_cast<std::size_t>(i)]);
}

TorusPoint TorusPoint::zero(int dim) {
    check_dim(dim);
    TorusPoint p;
    p.dim_ = dim;
    return p;
}

double torus_distance(const TorusPoint& b1, const TorusPoint& b2) {
    if (b1.dim() != b2.dim())
        throw ValidationError("torus_distance: dimension mismatch");
    // Squared quotient distance is separable: per coordinate, the minimal
    // shift is either the plain difference or its 1-complement.
    double s = 0.0;
    for (int i = 0; i < b1.dim(); ++i) {
        double d = std::fabs(b1[i] - b2[i]);
        d = std::min(d, 1.0 - d);
        s += d * d;
    }
    return std::sqrt(s);
}

ToralAutomorphism::ToralAutomorphism(std::vector<std::int64_t> entries, int dim)
    : m_(std::move(entries)), dim_(dim) {
    check_dim(dim);
    if (m_.size() != static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim))
        throw ValidationError("ToralAutomorphism: matrix entry count does not match dimension");

    const std::int64_t det = integer_determinant(m_, dim_);
    if (det != 1 && det != -1) {
        std::ostringstream os;
        os << "ToralAutomorphism: |det| = " << std::llabs(det) << ", must be 1";
        throw ValidationError(os.str());
    }

    Eigen::MatrixXd a(dim_, dim_);
    for (int r = 0; r < dim_; ++r)
        for (int c = 0; c < dim_; ++c) a(r, c) = static_cast<double>(entry(r, c));
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, /*computeEigenvectors=*/false);
    double mu = 0.0;
    for (int i = 0; i < dim_; ++i) {
        const double mod = std::abs(es.eigenvalues()[i]);
        if (std::fabs(mod - 1.0) <= 1e-9) {
            std::ostringstream os;
            os << "ToralAutomorphism: eigenvalue of modulus " << mod
               << " on the unit circle; matrix is not hyperbolic";
            throw ValidationError(os.str());
        }
        mu = std::max(mu, mod);
    }
    mu_ = mu;
}

ToralAutomorphism ToralAutomorphism::cat_map() {
    return ToralAutomorphism({2, 1, 1, 1}, 2);
}

TorusPoint ToralAutomorphism::apply(const TorusPoint& b) const {
    if (b.dim() != dim_)
        throw ValidationError("ToralAutomorphism::apply: dimension mismatch");
    std::array<double, kMaxDim> out{};
    for (int r = 0; r < dim_; ++r) {
        double s = 0.0;
        for (int c = 0; c < dim_; ++c) s += static_cast<double>(entry(r, c)) * b[c];
        out[static_cast<std::size_t>(r)] = TorusPoint::reduce(s);
    }
    return TorusPoint(std::span<const double>(out.data(), static_cast<std::size_t>(dim_)));
}

TorusPoint ToralAutomorphism::iterate(const TorusPoint& b, int k) const {
    if (k < 0) throw ValidationError("ToralAutomorphism::iterate: k must be >= 0");
    TorusPoint p = b;
    for (int i = 0; i < k; ++i) p = apply(p);
    return p;
}

void ToralAutomorphism::apply_index(std::span<const std::int64_t> in,
                                    std::span<std::int64_t> out, std::int64_t n) const {
    for (int r = 0; r < dim_; ++r) {
        std::int64_t s = 0;
        for (int c = 0; c < dim_; ++c) s += entry(r, c) * in[static_cast<std::size_t>(c)];
        s %= n;
        if (s < 0) s += n;
        out[static_cast<std::size_t>(r)] = s;
    }
}

}  // namespace skewlin
