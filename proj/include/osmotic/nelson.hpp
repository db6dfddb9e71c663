#ifndef OSMOTIC_NELSON_HPP
#define OSMOTIC_NELSON_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "osmotic/grid.hpp"
#include "osmotic/madelung.hpp"
#include "osmotic/params.hpp"
#include "osmotic/states.hpp"

namespace osmotic {

enum class InitialSampling { gaussian_exact, inverse_cdf };

struct SdeConfig {
    std::size_t n_paths = 10000;
    double dt = 1e-3;
    double t_final = 1.0;
    std::uint64_t seed = 1;
    InitialSampling initial_sampling = InitialSampling::gaussian_exact;
};

struct PathEnsembleStats {
    double t = 0.0;
    double emp_mean = 0.0;
    double emp_var = 0.0;
    double stderr_mean = 0.0;
    double stderr_var = 0.0;
};

/// Marginal samples X(t) at the checkpoint times, one row per checkpoint.
/// Bitwise reproducible for a fixed config: every path owns an independent
/// stream derived from (seed, path index), so scheduling cannot reorder
/// draws, and statistics are computed in path order.
struct PathEnsemble {
    std::vector<double> times;
    std::vector<std::vector<double>> samples;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t path_stream_seed(std::uint64_t seed, std::uint64_t path) {
    return splitmix64(splitmix64(seed) ^ (path * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
}

}  // namespace detail

/// Linear drift v_+(x, t) = a(t) x + b(t) tabulated on a dense time grid,
/// the closed form for Gaussian states:
///   a = -(hbar / (m l^2 |nu|^2)) (1/2 + Im(mu nu*)),
///   b = [ (hbar/l) Im(alpha/nu) + xbar hbar/(2 l^2 |nu|^2) ] / m.
class LinearDriftTable {
  public:
    LinearDriftTable(std::vector<double> times, std::vector<double> a, std::vector<double> b)
        : t_(std::move(times)), a_(std::move(a)), b_(std::move(b)) {
        if (t_.size() < 1 || t_.size() != a_.size() || t_.size() != b_.size())
            throw std::invalid_argument("LinearDriftTable: inconsistent table");
        // The tables the builders produce are uniformly spaced; indexed
        // lookup keeps the per-step cost flat (this sits in the SDE hot loop).
        if (t_.size() >= 2) {
            const double h = t_[1] - t_[0];
            uniform_ = h > 0.0;
            for (std::size_t i = 2; i < t_.size() && uniform_; ++i)
                if (std::abs((t_[i] - t_[i - 1]) - h) > 1e-9 * std::max(1.0, std::abs(h)))
                    uniform_ = false;
            inv_h_ = uniform_ ? 1.0 / h : 0.0;
        }
    }

    double operator()(double x, double t) const {
        if (t_.size() == 1 || t <= t_.front()) return a_.front() * x + b_.front();
        if (t >= t_.back()) return a_.back() * x + b_.back();
        std::size_t j;
        double f;
        if (uniform_) {
            const double u = (t - t_.front()) * inv_h_;
            const auto k = static_cast<std::size_t>(u);
            j = std::min(k + 1, t_.size() - 1);
            f = u - static_cast<double>(j - 1);
        } else {
            const auto it = std::upper_bound(t_.begin(), t_.end(), t);
            j = static_cast<std::size_t>(it - t_.begin());
            f = (t - t_[j - 1]) / (t_[j] - t_[j - 1]);
        }
        const double a = a_[j - 1] + f * (a_[j] - a_[j - 1]);
        const double b = b_[j - 1] + f * (b_[j] - b_[j - 1]);
        return a * x + b;
    }

    double a_at(double t) const { return operator()(1.0, t) - operator()(0.0, t); }
    double b_at(double t) const { return operator()(0.0, t); }

  private:
    std::vector<double> t_, a_, b_;
    bool uniform_ = false;
    double inv_h_ = 0.0;
};

inline void drift_coefficients(const SqueezedStateParams& sp, double& a, double& b) {
    const double hbar = sp.params.hbar;
    const double m = sp.params.mass;
    const double l = sp.params.length_scale();
    const double nu2 = std::norm(sp.nu);
    const double im = std::imag(sp.mu * std::conj(sp.nu));
    const double xbar = mean_x_closed_form(sp);
    a = -(hbar / (m * l * l * nu2)) * (0.5 + im);
    b = ((hbar / l) * std::imag(sp.alpha / sp.nu) + xbar * hbar / (2.0 * l * l * nu2)) / m;
}

/// Tabulates the Gaussian-state drift along the epsilon-ODE trajectory.
inline LinearDriftTable make_drift_table(const SqueezedStateParams& sp0,
                                         const FrequencyProfile& w, double t_final,
                                         double table_dt = 1e-3) {
    std::vector<double> ts, as, bs;
    EpsilonState e = epsilon_from_params(sp0);
    SqueezedStateParams sp = sp0;
    double t = 0.0;
    while (true) {
        double a, b;
        drift_coefficients(sp, a, b);
        ts.push_back(t);
        as.push_back(a);
        bs.push_back(b);
        if (t >= t_final) break;
        const double tn = std::min(t_final, t + table_dt);
        e = evolve_epsilon(e, w, tn, table_dt);
        auto [mu, nu] = mu_nu_from_epsilon(e, sp.params);
        sp.mu = mu;
        sp.nu = nu;
        t = tn;
    }
    return LinearDriftTable(std::move(ts), std::move(as), std::move(bs));
}

/// Time-frozen drift sampled from decomposed grid fields; linear
/// extrapolation continues the tails beyond the masked edges.
class GridDrift {
  public:
    GridDrift(const MadelungFields& mf, const PhysicalParams& p) : grid_(mf.grid) {
        v_.resize(grid_.n, 0.0);
        lo_ = mf.first_unmasked();
        hi_ = mf.last_unmasked();
        if (hi_ <= lo_ + 1) throw std::invalid_argument("GridDrift: unusable fields");
        for (std::size_t i = lo_; i <= hi_; ++i)
            v_[i] = (mf.p_c.values[i] + mf.p_s.values[i]) / p.mass;
    }

    double operator()(double x, double /*t*/) const {
        const double xl = grid_.x(lo_), xh = grid_.x(hi_);
        if (x <= xl) return v_[lo_] + (v_[lo_ + 1] - v_[lo_]) / grid_.dx * (x - xl);
        if (x >= xh) return v_[hi_] + (v_[hi_] - v_[hi_ - 1]) / grid_.dx * (x - xh);
        const double f = (x - grid_.x(0)) / grid_.dx;
        const auto j = static_cast<std::size_t>(f);
        const double w = f - static_cast<double>(j);
        return v_[j] * (1.0 - w) + v_[j + 1] * w;
    }

  private:
    Grid grid_;
    std::vector<double> v_;
    std::size_t lo_ = 0, hi_ = 0;
};

/// Draws X(0) from an exact Gaussian law.
struct GaussianSampler {
    double mean = 0.0;
    double sigma = 1.0;
    template <typename Rng>
    double operator()(Rng& rng) const {
        std::normal_distribution<double> n(mean, sigma);
        return n(rng);
    }
};

/// Draws X(0) by inverting the cumulative of a gridded density.
class InverseCdfSampler {
  public:
    explicit InverseCdfSampler(const RealField& rho) : grid_(rho.grid) {
        cdf_.resize(grid_.n, 0.0);
        for (std::size_t i = 1; i < grid_.n; ++i)
            cdf_[i] = cdf_[i - 1] + 0.5 * (rho.values[i - 1] + rho.values[i]) * grid_.dx;
        const double total = cdf_.back();
        if (!(total > 0.0)) throw std::invalid_argument("InverseCdfSampler: empty density");
        for (auto& c : cdf_) c /= total;
    }

    template <typename Rng>
    double operator()(Rng& rng) const {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const double y = u(rng);
        const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), y);
        if (it == cdf_.begin()) return grid_.x(0);
        const std::size_t j = static_cast<std::size_t>(it - cdf_.begin());
        const double c0 = cdf_[j - 1], c1 = cdf_[j];
        const double w = (c1 > c0) ? (y - c0) / (c1 - c0) : 0.0;
        return grid_.x(j - 1) + w * grid_.dx;
    }

  private:
    Grid grid_;
    std::vector<double> cdf_;
};

/// Euler-Maruyama simulation of dX = v_+(X,t) dt + sqrt(2D) dW, recording
/// the marginal at each checkpoint.  Paths are simulated in fixed blocks in
/// parallel; results are independent of the thread count.
template <typename Drift, typename Initial>
PathEnsemble sample_paths(const SdeConfig& cfg, const Drift& drift, const Initial& initial,
                          double diffusion, std::vector<double> checkpoints) {
    if (cfg.n_paths < 100) throw std::invalid_argument("sample_paths: need at least 100 paths");
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("sample_paths: dt must be positive");
    if (!(diffusion >= 0.0)) throw std::invalid_argument("sample_paths: negative diffusion");
    std::sort(checkpoints.begin(), checkpoints.end());

    const auto steps = static_cast<std::size_t>(std::llround(std::ceil(cfg.t_final / cfg.dt - 1e-12)));
    const double h = (steps > 0) ? cfg.t_final / static_cast<double>(steps) : 0.0;

    // Snap checkpoints to the step grid.
    std::vector<std::size_t> cp_step;
    PathEnsemble ens;
    for (double tc : checkpoints) {
        if (tc < 0.0 || tc > cfg.t_final + 1e-12)
            throw std::invalid_argument("sample_paths: checkpoint outside [0, t_final]");
        const auto k = static_cast<std::size_t>(std::llround(h > 0 ? tc / h : 0.0));
        cp_step.push_back(std::min(k, steps));
        ens.times.push_back(static_cast<double>(cp_step.back()) * h);
    }
    ens.n_paths = cfg.n_paths;
    ens.seed = cfg.seed;
    ens.samples.assign(cp_step.size(), std::vector<double>(cfg.n_paths, 0.0));

    const double noise = std::sqrt(2.0 * diffusion * h);

    auto run_block = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            std::mt19937_64 rng(detail::path_stream_seed(cfg.seed, i));
            std::normal_distribution<double> gauss(0.0, 1.0);
            double x = initial(rng);
            std::size_t next_cp = 0;
            while (next_cp < cp_step.size() && cp_step[next_cp] == 0) {
                ens.samples[next_cp][i] = x;
                ++next_cp;
            }
            for (std::size_t k = 0; k < steps; ++k) {
                const double t = static_cast<double>(k) * h;
                const double v = drift(x, t);
                if (!std::isfinite(v)) throw std::runtime_error("sample_paths: non-finite drift");
                x += v * h + noise * gauss(rng);
                while (next_cp < cp_step.size() && cp_step[next_cp] == k + 1) {
                    ens.samples[next_cp][i] = x;
                    ++next_cp;
                }
            }
        }
    };

    const std::size_t block = 8192;
    const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::future<void>> pending;
    for (std::size_t begin = 0; begin < cfg.n_paths; begin += block) {
        const std::size_t end = std::min(cfg.n_paths, begin + block);
        if (workers == 1) {
            run_block(begin, end);
        } else {
            pending.push_back(std::async(std::launch::async, run_block, begin, end));
            if (pending.size() >= workers) {
                for (auto& f : pending) f.get();
                pending.clear();
            }
        }
    }
    for (auto& f : pending) f.get();
    return ens;
}

/// Unbiased mean/variance with Monte Carlo standard errors; the variance
/// error uses the fourth-moment formula.
inline PathEnsembleStats empirical_moments(const PathEnsemble& ens, double t) {
    std::size_t idx = ens.times.size();
    for (std::size_t i = 0; i < ens.times.size(); ++i)
        if (std::abs(ens.times[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) idx = i;
    if (idx == ens.times.size())
        throw std::invalid_argument("empirical_moments: t is not a sampled checkpoint");
    const auto& xs = ens.samples[idx];
    const auto n = static_cast<double>(xs.size());
    if (xs.size() < 2) throw std::invalid_argument("empirical_moments: need at least 2 paths");

    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m4 /= n;
    const double s2 = m2 * n / (n - 1.0);

    PathEnsembleStats st;
    st.t = ens.times[idx];
    st.emp_mean = mean;
    st.emp_var = s2;
    st.stderr_mean = std::sqrt(s2 / n);
    const double var_of_var = (m4 - (n - 3.0) / (n - 1.0) * s2 * s2) / n;
    st.stderr_var = std::sqrt(std::max(0.0, var_of_var));
    return st;
}

/// Kolmogorov-Smirnov distance between the samples and a reference CDF.
template <typename Cdf>
double ks_distance(std::vector<double> xs, const Cdf& cdf) {
    std::sort(xs.begin(), xs.end());
    const auto n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    }
    return d;
}

inline double gaussian_cdf(double x, double mean, double sigma) {
    return 0.5 * std::erfc(-(x - mean) / (sigma * std::sqrt(2.0)));
}

}  // namespace osmotic

#endif
