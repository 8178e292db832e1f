#include "counterchain/limit_laws.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "counterchain/errors.hpp"
#include "counterchain/rng.hpp"

namespace cchain {

namespace {

void require_open_unit(double x, const char* name) {
    if (!(x > 0.0 && x < 1.0)) throw RangeError(std::string(name) + " must lie in (0, 1)");
}

// Dense integer pmf: probs[i] is the mass at lo + i.
struct Dense {
    std::int64_t lo = 0;
    std::vector<double> probs;
    double tail = 0.0;
};

Dense to_dense(const DiscreteDist& d) {
    Dense out;
    if (d.support.empty()) {
        out.tail = d.tail_mass;
        return out;
    }
    for (double s : d.support)
        if (s != std::floor(s)) throw RangeError("compound_pmf: support must be integer");
    out.lo = static_cast<std::int64_t>(d.support.front());
    const auto hi = static_cast<std::int64_t>(d.support.back());
    out.probs.assign(static_cast<std::size_t>(hi - out.lo + 1), 0.0);
    for (std::size_t i = 0; i < d.support.size(); ++i)
        out.probs[static_cast<std::size_t>(static_cast<std::int64_t>(d.support[i]) - out.lo)] = d.probs[i];
    out.tail = d.tail_mass;
    return out;
}

void trim(Dense& d, double trunc) {
    std::size_t first = 0, last = d.probs.size();
    double cut = 0.0;
    while (first < last && cut + d.probs[first] < trunc / 2) cut += d.probs[first++];
    double cut_hi = 0.0;
    while (last > first && cut_hi + d.probs[last - 1] < trunc / 2) cut_hi += d.probs[--last];
    d.tail += cut + cut_hi;
    d.lo += static_cast<std::int64_t>(first);
    d.probs = std::vector<double>(d.probs.begin() + static_cast<std::ptrdiff_t>(first),
                                  d.probs.begin() + static_cast<std::ptrdiff_t>(last));
}

Dense convolve(const Dense& x, const Dense& y, double trunc) {
    Dense out;
    out.tail = x.tail + y.tail - x.tail * y.tail;
    if (x.probs.empty() || y.probs.empty()) return out;
    out.lo = x.lo + y.lo;
    out.probs.assign(x.probs.size() + y.probs.size() - 1, 0.0);
    for (std::size_t i = 0; i < x.probs.size(); ++i) {
        const double px = x.probs[i];
        if (px == 0.0) continue;
        double* dst = out.probs.data() + i;
        for (std::size_t j = 0; j < y.probs.size(); ++j) dst[j] += px * y.probs[j];
    }
    trim(out, trunc);
    return out;
}

DiscreteDist from_dense(const Dense& d) {
    DiscreteDist out;
    out.tail_mass = d.tail;
    for (std::size_t i = 0; i < d.probs.size(); ++i) {
        if (d.probs[i] == 0.0) continue;
        out.support.push_back(static_cast<double>(d.lo + static_cast<std::int64_t>(i)));
        out.probs.push_back(d.probs[i]);
    }
    return out;
}

// Geometric magnitude on {1, 2, ...} with success probability p from an Exp(1) variate.
std::int64_t geometric_from_exponential(double e, double p) {
    return 1 + static_cast<std::int64_t>(std::floor(e / -std::log1p(-p)));
}

// Smallest k with P(N <= k) >= u for N ~ Binomial(n, a).
std::int64_t binomial_inverse(double u, std::int64_t n, double a) {
    double pk = std::pow(1.0 - a, static_cast<double>(n));
    double cdf = pk;
    std::int64_t k = 0;
    const double odds = a / (1.0 - a);
    while (cdf < u && k < n) {
        pk *= odds * static_cast<double>(n - k) / static_cast<double>(k + 1);
        ++k;
        cdf += pk;
    }
    return k;
}

std::int64_t poisson_inverse(double u, double mean) {
    double pk = std::exp(-mean);
    double cdf = pk;
    std::int64_t k = 0;
    while (cdf < u && k < 1000) {
        ++k;
        pk *= mean / static_cast<double>(k);
        cdf += pk;
    }
    return k;
}

}  // namespace

DiscreteDist DiscreteDist::point_mass(double x) {
    DiscreteDist d;
    d.support = {x};
    d.probs = {1.0};
    return d;
}

double DiscreteDist::mass() const {
    double s = 0.0;
    for (double p : probs) s += p;
    return s;
}

void DiscreteDist::validate() const {
    if (support.size() != probs.size()) throw RangeError("DiscreteDist: support/probs size mismatch");
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (!(probs[i] >= 0.0)) throw RangeError("DiscreteDist: negative probability");
        if (i > 0 && !(support[i] > support[i - 1]))
            throw RangeError("DiscreteDist: support not strictly increasing");
    }
    if (!(tail_mass >= 0.0)) throw RangeError("DiscreteDist: negative tail mass");
    if (std::fabs(mass() + tail_mass - 1.0) > 1e-12) throw RangeError("DiscreteDist: mass does not sum to 1");
}

double DiscreteDist::mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) s += support[i] * probs[i];
    return s;
}

double DiscreteDist::second_moment() const {
    double s = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) s += support[i] * support[i] * probs[i];
    return s;
}

double DiscreteDist::prob_at(double x) const {
    const auto it = std::lower_bound(support.begin(), support.end(), x);
    if (it == support.end() || *it != x) return 0.0;
    return probs[static_cast<std::size_t>(it - support.begin())];
}

double g_pmf(double a, double p, std::int64_t k) {
    require_open_unit(a, "a");
    require_open_unit(p, "p");
    if (k == 0) return 1.0 - a;
    const double n = static_cast<double>(k < 0 ? -k : k);
    return (a / 2.0) * p * std::pow(1.0 - p, n - 1.0);
}

DiscreteDist g_dist(double a, double p, double tail_tol) {
    require_open_unit(a, "a");
    require_open_unit(p, "p");
    // a (1-p)^K < tail_tol
    const auto cut = static_cast<std::int64_t>(std::ceil(std::log(tail_tol / a) / std::log1p(-p)));
    const std::int64_t kmax = std::max<std::int64_t>(cut, 1);
    DiscreteDist d;
    d.support.reserve(static_cast<std::size_t>(2 * kmax + 1));
    for (std::int64_t k = -kmax; k <= kmax; ++k) {
        d.support.push_back(static_cast<double>(k));
        d.probs.push_back(g_pmf(a, p, k));
    }
    d.tail_mass = a * std::pow(1.0 - p, static_cast<double>(kmax));
    return d;
}

std::vector<std::int64_t> g_sampler(double a, double p, std::uint64_t seed, std::size_t count) {
    require_open_unit(a, "a");
    require_open_unit(p, "p");
    Engine eng = make_engine(seed, stream::kGSampler);
    std::vector<std::int64_t> out(count);
    for (auto& x : out) {
        const double u = uniform_open(eng);
        if (u >= a) {
            x = 0;
            continue;
        }
        const std::int64_t mag = geometric_from_exponential(standard_exponential(eng), p);
        x = u < a / 2.0 ? -mag : mag;
    }
    return out;
}

std::vector<double> sample_mu_p1sl(std::uint64_t seed, std::size_t count) {
    Engine eng = make_engine(seed, stream::kMuSampler);
    std::vector<double> out(count);
    for (auto& y : out) {
        const std::int64_t n = poisson_inverse(uniform_open(eng), 1.0);
        double s = 0.0;
        for (std::int64_t i = 0; i < n; ++i) {
            const double e = standard_exponential(eng);
            s += uniform_open(eng) < 0.5 ? -e : e;
        }
        y = s;
    }
    return out;
}

double mu_p1sl_char_fn(double t) { return std::exp(-t * t / (1.0 + t * t)); }

DiscreteDist compound_pmf(const DiscreteDist& base, std::int64_t count, double trunc) {
    if (count < 1) throw RangeError("compound_pmf: count must be >= 1");
    if (count == 1) return base;
    Dense acc;
    acc.probs = {1.0};
    bool have_acc = false;
    Dense power = to_dense(base);
    for (std::int64_t e = count; e > 0; e >>= 1) {
        if (e & 1) {
            acc = have_acc ? convolve(acc, power, trunc) : power;
            have_acc = true;
        }
        if (e > 1) power = convolve(power, power, trunc);
    }
    if (acc.tail > 1e-6)
        throw PrecisionError("compound_pmf: truncated tail mass " + std::to_string(acc.tail) + " exceeds 1e-6");
    return from_dense(acc);
}

double tv_distance(const DiscreteDist& x, const DiscreteDist& y) {
    double total = 0.0;
    std::size_t i = 0, j = 0;
    while (i < x.support.size() || j < y.support.size()) {
        if (j == y.support.size() || (i < x.support.size() && x.support[i] < y.support[j])) {
            total += x.probs[i++];
        } else if (i == x.support.size() || y.support[j] < x.support[i]) {
            total += y.probs[j++];
        } else {
            total += std::fabs(x.probs[i++] - y.probs[j++]);
        }
    }
    return std::min(1.0, 0.5 * total + 0.5 * (x.tail_mass + y.tail_mass));
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw RangeError("ks_distance: samples must be nonempty");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_distance_to_cdf(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw RangeError("ks_distance_to_cdf: sample must be nonempty");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    std::size_t i = 0;
    while (i < sample.size()) {
        const double v = sample[i];
        const double before = static_cast<double>(i) / n;
        while (i < sample.size() && sample[i] == v) ++i;
        const double after = static_cast<double>(i) / n;
        const double f = cdf(v);
        d = std::max({d, std::fabs(f - before), std::fabs(after - f)});
    }
    return d;
}

ScaledGeometricSample scaled_geometric_samples(double a, double p, std::int64_t j_count, std::uint64_t seed,
                              std::size_t n_rep) {
    require_open_unit(a, "a");
    require_open_unit(p, "p");
    const double aj = a * static_cast<double>(j_count);
    if (!(aj >= 0.5 && aj <= 2.0)) throw RangeError("check_scaled_geometric_sums: a * j_count must lie in [0.5, 2]");
    ScaledGeometricSample out;
    out.scaled_sums.resize(n_rep);
    out.reference.resize(n_rep);
    std::vector<double> expo, sign;
    for (std::size_t r = 0; r < n_rep; ++r) {
        Engine eng = make_engine(seed, stream::kScaledGeometric, r);
        const double u = uniform_open(eng);
        const std::int64_t n_nonzero = binomial_inverse(u, j_count, a);
        const std::int64_t n_poisson = poisson_inverse(u, 1.0);
        const std::int64_t n_draw = std::max(n_nonzero, n_poisson);
        expo.resize(static_cast<std::size_t>(n_draw));
        sign.resize(static_cast<std::size_t>(n_draw));
        for (std::int64_t i = 0; i < n_draw; ++i) {
            expo[static_cast<std::size_t>(i)] = standard_exponential(eng);
            sign[static_cast<std::size_t>(i)] = uniform_open(eng) < 0.5 ? -1.0 : 1.0;
        }
        std::int64_t zeta_sum = 0;
        for (std::int64_t i = 0; i < n_nonzero; ++i) {
            const auto k = static_cast<std::size_t>(i);
            zeta_sum += static_cast<std::int64_t>(sign[k]) * geometric_from_exponential(expo[k], p);
        }
        double laplace_sum = 0.0;
        for (std::int64_t i = 0; i < n_poisson; ++i) {
            const auto k = static_cast<std::size_t>(i);
            laplace_sum += sign[k] * expo[k];
        }
        out.scaled_sums[r] = p * static_cast<double>(zeta_sum);
        out.reference[r] = laplace_sum;
    }
    return out;
}

double check_scaled_geometric_sums(double a, double p, std::int64_t j_count, std::uint64_t seed, std::size_t n_rep) {
    ScaledGeometricSample s = scaled_geometric_samples(a, p, j_count, seed, n_rep);
    return ks_distance(std::move(s.scaled_sums), std::move(s.reference));
}

}  // namespace cchain
