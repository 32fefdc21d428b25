#include "skewlin/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "skewlin/errors.hpp"
#include "skewlin/rng.hpp"

namespace skewlin {

namespace {

std::size_t pow_size(int base, int exp) {
    std::size_t r = 1;
    for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
    return r;
}

/// Grid coordinate b*n split into node index and weight, with queries within
/// 1e-12 of a node snapped onto it so node reads reproduce stored values.
void split_periodic(double coord, int n, int& i0, double& w) {
    double u = coord * n;
    const double r = std::nearbyint(u);
    if (std::fabs(u - r) < 1e-12 * n) u = r;
    double fl = std::floor(u);
    w = u - fl;
    std::int64_t i = static_cast<std::int64_t>(fl) % n;
    if (i < 0) i += n;
    i0 = static_cast<int>(i);
}

}  // namespace

GridFunction::GridFunction(int dim, int nb, int nx, double epsilon)
    : dim_(dim), nb_(nb), nx_(nx), eps_(epsilon) {
    if (dim < 1 || dim > kMaxDim) throw ValidationError("GridFunction: bad dimension");
    if (nb < 2 || nx < 2) throw ValidationError("GridFunction: need nb >= 2 and nx >= 2");
    if (!(epsilon > 0.0)) throw ValidationError("GridFunction: epsilon must be > 0");
    dx_ = epsilon / (nx - 1);
    b_count_ = pow_size(nb, dim);
    v_.assign(b_count_ * static_cast<std::size_t>(nx), 0.0);
}

void GridFunction::node_indices(std::size_t b_flat, std::span<int> out) const {
    for (int i = dim_ - 1; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = static_cast<int>(b_flat % static_cast<std::size_t>(nb_));
        b_flat /= static_cast<std::size_t>(nb_);
    }
}

TorusPoint GridFunction::node_point(std::size_t b_flat) const {
    std::array<int, kMaxDim> idx{};
    node_indices(b_flat, std::span<int>(idx.data(), static_cast<std::size_t>(dim_)));
    std::array<double, kMaxDim> c{};
    for (int i = 0; i < dim_; ++i)
        c[static_cast<std::size_t>(i)] = static_cast<double>(idx[static_cast<std::size_t>(i)]) / nb_;
    return TorusPoint(std::span<const double>(c.data(), static_cast<std::size_t>(dim_)));
}

double GridFunction::eval_on_column(std::size_t b_flat, double x) const {
    double u = x / dx_;
    const double r = std::nearbyint(u);
    if (std::fabs(u - r) < 1e-9) u = r;
    int i0 = static_cast<int>(std::floor(u));
    if (i0 < 0) i0 = 0;
    if (i0 > nx_ - 2) i0 = nx_ - 2;
    const double w = u - i0;
    const double* col = v_.data() + b_flat * static_cast<std::size_t>(nx_);
    return col[i0] * (1.0 - w) + col[i0 + 1] * w;
}

double GridFunction::eval(const TorusPoint& b, double x) const {
    if (b.dim() != dim_) throw ValidationError("GridFunction::eval: dimension mismatch");
    if (x < -1e-12 || x > eps_ + 1e-12) {
        std::ostringstream os;
        os << "GridFunction::eval: x = " << x << " outside [0, " << eps_ << "]";
        throw ValidationError(os.str());
    }
    if (x < 0.0) x = 0.0;
    if (x > eps_) x = eps_;

    std::array<int, kMaxDim> i0{};
    std::array<double, kMaxDim> w{};
    for (int i = 0; i < dim_; ++i)
        split_periodic(b[i], nb_, i0[static_cast<std::size_t>(i)], w[static_cast<std::size_t>(i)]);

    double acc = 0.0;
    const int corners = 1 << dim_;
    for (int c = 0; c < corners; ++c) {
        double weight = 1.0;
        std::size_t flat = 0;
        for (int i = 0; i < dim_; ++i) {
            const bool hi = (c >> i) & 1;
            const double wi = w[static_cast<std::size_t>(i)];
            weight *= hi ? wi : 1.0 - wi;
            int idx = i0[static_cast<std::size_t>(i)] + (hi ? 1 : 0);
            if (idx >= nb_) idx -= nb_;
            flat = flat * static_cast<std::size_t>(nb_) + static_cast<std::size_t>(idx);
        }
        if (weight != 0.0) acc += weight * eval_on_column(flat, x);
    }
    return acc;
}

double GridFunction::c_norm(kernels::Mode mode) const {
    return kernels::max_over(v_.size(), [&](std::size_t i) { return std::fabs(v_[i]); }, mode);
}

double GridFunction::lipschitz_x(kernels::Mode mode) const {
    if (nx_ < 2) throw ValidationError("lipschitz_x needs nx >= 2");
    const std::size_t n = b_count_ * static_cast<std::size_t>(nx_ - 1);
    return kernels::max_over(
        n,
        [&](std::size_t i) {
            const std::size_t bf = i / static_cast<std::size_t>(nx_ - 1);
            const int xi = static_cast<int>(i % static_cast<std::size_t>(nx_ - 1));
            return std::fabs(value(bf, xi + 1) - value(bf, xi)) / dx_;
        },
        mode);
}

NormReport GridFunction::holder_norm(double alpha, int n_pairs, std::span<const double> scales,
                                     std::uint64_t seed, kernels::Mode mode) const {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw ValidationError("holder_norm: alpha must be in (0, 1]");
    NormReport rep;
    rep.holder_alpha = alpha;
    rep.n_pairs = n_pairs;
    rep.c_norm = c_norm(mode);
    rep.lip_x = lipschitz_x(mode);
    const double spacing = 1.0 / nb_;
    for (std::size_t si = 0; si < scales.size(); ++si) {
        const double s = scales[si];
        if (s >= 0.5) throw ValidationError("holder_norm: scales must stay below 0.5");
        if (s <= spacing) {
            std::ostringstream os;
            os << "scale " << s << " at or below b-grid spacing " << spacing
               << "; interpolation smooths sub-grid variation";
            rep.warnings.push_back(os.str());
        }
        const double ms = kernels::max_over(
            static_cast<std::size_t>(n_pairs),
            [&](std::size_t p) {
                SplitMix64 g(rng_key(seed, 0x601de5, si, p));
                const auto [b1, b2] = random_pair_at_scale(g, dim_, s);
                const double dist = torus_distance(b1, b2);
                double m = 0.0;
                for (int xi = 0; xi < nx_; ++xi) {
                    const double x = x_node(xi);
                    m = std::max(m, std::fabs(eval(b1, x) - eval(b2, x)));
                }
                return m / std::pow(dist, alpha);
            },
            mode);
        rep.per_scale.emplace_back(s, ms);
        rep.holder_norm = std::max(rep.holder_norm, ms);
    }
    return rep;
}

void GridFunction::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", eps_);
    out << "# gridfunction dim=" << dim_ << " nb=" << nb_ << " nx=" << nx_ << " epsilon=" << buf
        << "\n";
    std::array<int, kMaxDim> idx{};
    for (std::size_t bf = 0; bf < b_count_; ++bf) {
        node_indices(bf, std::span<int>(idx.data(), static_cast<std::size_t>(dim_)));
        for (int xi = 0; xi < nx_; ++xi) {
            for (int i = 0; i < dim_; ++i) out << idx[static_cast<std::size_t>(i)] << ',';
            std::snprintf(buf, sizeof buf, "%.17g", value(bf, xi));
            out << xi << ',' << buf << '\n';
        }
    }
}

GridFunction GridFunction::read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::string header;
    std::getline(in, header);
    int dim = 0, nb = 0, nx = 0;
    double eps = 0.0;
    if (std::sscanf(header.c_str(), "# gridfunction dim=%d nb=%d nx=%d epsilon=%lg", &dim, &nb,
                    &nx, &eps) != 4)
        throw ValidationError("bad gridfunction csv header in " + path.string());
    GridFunction g(dim, nb, nx, eps);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t bf = 0;
        const char* p = line.c_str();
        char* end = nullptr;
        for (int i = 0; i < dim; ++i) {
            bf = bf * static_cast<std::size_t>(nb) +
                 static_cast<std::size_t>(std::strtol(p, &end, 10));
            p = end + 1;
        }
        const long xi = std::strtol(p, &end, 10);
        p = end + 1;
        g.value(bf, static_cast<int>(xi)) = std::strtod(p, nullptr);
    }
    return g;
}

void GridFunction::write_binary(const std::filesystem::path& bin_path,
                                const std::filesystem::path& meta_path) const {
    std::ofstream bin(bin_path, std::ios::binary);
    if (!bin) throw ValidationError("cannot open " + bin_path.string() + " for writing");
    bin.write(reinterpret_cast<const char*>(v_.data()),
              static_cast<std::streamsize>(v_.size() * sizeof(double)));

    nlohmann::ordered_json meta;
    meta["format"] = "gridfunction-bin";
    meta["version"] = 1;
    meta["dim"] = dim_;
    meta["n_b"] = nb_;
    meta["n_x"] = nx_;
    meta["epsilon"] = eps_;
    meta["count"] = v_.size();
    meta["layout"] = "b-major, x contiguous, native little-endian float64";
    std::ofstream m(meta_path);
    if (!m) throw ValidationError("cannot open " + meta_path.string() + " for writing");
    m << meta.dump(2) << "\n";
}

GridFunction GridFunction::read_binary(const std::filesystem::path& bin_path,
                                       const std::filesystem::path& meta_path) {
    std::ifstream m(meta_path);
    if (!m) throw ValidationError("cannot open " + meta_path.string());
    nlohmann::json meta = nlohmann::json::parse(m);
    GridFunction g(meta.at("dim").get<int>(), meta.at("n_b").get<int>(), meta.at("n_x").get<int>(),
                   meta.at("epsilon").get<double>());
    std::ifstream bin(bin_path, std::ios::binary);
    if (!bin) throw ValidationError("cannot open " + bin_path.string());
    bin.read(reinterpret_cast<char*>(g.v_.data()),
             static_cast<std::streamsize>(g.v_.size() * sizeof(double)));
    if (static_cast<std::size_t>(bin.gcount()) != g.v_.size() * sizeof(double))
        throw ValidationError("binary grid dump " + bin_path.string() + " has wrong size");
    return g;
}

}  // namespace skewlin
