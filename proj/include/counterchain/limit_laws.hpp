#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace cchain {

// Finite discrete law; mass dropped by truncation is kept in tail_mass.
struct DiscreteDist {
    std::vector<double> support;  // strictly increasing
    std::vector<double> probs;
    double tail_mass = 0.0;

    static DiscreteDist point_mass(double x);
    // Throws RangeError when the invariants fail (tolerance 1e-12 on total mass).
    void validate() const;
    double mass() const;  // sum of probs, tail excluded
    double mean() const;
    double second_moment() const;
    double prob_at(double x) const;  // 0 when x is not a support point
};

struct LimitLawSpec {
    enum class Summand { Laplace };
    double poisson_mean = 1.0;
    Summand summand = Summand::Laplace;
};

// Symmetric integer law: 1-a at 0, (a/2) p (1-p)^(|k|-1) elsewhere.
double g_pmf(double a, double p, std::int64_t k);
// g_{a,p} on |k| <= K with K the first cut leaving tail a(1-p)^K below tail_tol.
DiscreteDist g_dist(double a, double p, double tail_tol = 1e-12);
std::vector<std::int64_t> g_sampler(double a, double p, std::uint64_t seed, std::size_t count);

// Poisson(1) number of iid Laplace summands; N = 0 gives exactly 0.
std::vector<double> sample_mu_p1sl(std::uint64_t seed, std::size_t count);
double mu_p1sl_char_fn(double t);

// Exact count-fold convolution of an integer-supported law. Edge masses below
// trunc are moved to tail_mass; throws PrecisionError if the tail exceeds 1e-6.
DiscreteDist compound_pmf(const DiscreteDist& base, std::int64_t count, double trunc = 1e-15);

// (1/2) sum |p_x - p_y| + (1/2)(tail_x + tail_y): an upper bound on TV.
double tv_distance(const DiscreteDist& x, const DiscreteDist& y);

// Sup-norm distance between two empirical CDFs.
double ks_distance(std::vector<double> sample_a, std::vector<double> reference);
// Sup-norm distance between an empirical CDF and a continuous CDF.
double ks_distance_to_cdf(std::vector<double> sample, const std::function<double(double)>& cdf);

struct ScaledGeometricSample {
    std::vector<double> scaled_sums;  // p * sum of j_count draws of g_{a,p}
    std::vector<double> reference;    // mu_P1sL draws on the same uniform stream
};

// Replicate r of both samples consumes the same uniforms (common random numbers),
// so the KS distance tracks the discrepancy between the two laws rather than
// sampling noise.
ScaledGeometricSample scaled_geometric_samples(double a, double p, std::int64_t j_count, std::uint64_t seed,
                              std::size_t n_rep);
// KS distance between p * sum zeta_k and an equally sized mu_P1sL sample; a * j_count in [0.5, 2].
double check_scaled_geometric_sums(double a, double p, std::int64_t j_count, std::uint64_t seed, std::size_t n_rep);

}  // namespace cchain
