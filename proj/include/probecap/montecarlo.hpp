#pragma once

// Sampling-based verification: i.i.d. draws from joint tables, a plug-in
// conditional-information estimator with bootstrap error bars and a
// first-order bias correction, and a toy rate-splitting codec that runs the
// multiplexed random-coding scheme literally at small blocklengths.

#include <cstdint>
#include <random>

#include "probecap/model.hpp"
#include "probecap/parallel.hpp"
#include "probecap/solver.hpp"

namespace probecap {

struct SampleBatch {
    std::vector<std::string> roles;
    std::vector<Alphabet> alphabets;
    std::size_t n = 0;
    std::vector<std::vector<int>> columns; // per axis
    std::uint64_t seed = 0;

    int axis_index(const std::string& role) const {
        for (std::size_t i = 0; i < roles.size(); ++i)
            if (roles[i] == role) return static_cast<int>(i);
        throw std::invalid_argument("SampleBatch: unknown axis '" + role + "'");
    }
};

// n i.i.d. draws via inverse CDF on the flattened table (portable across
// standard libraries: only the raw engine output is used).
inline SampleBatch sample_joint(const JointTable& j, std::size_t n, std::uint64_t seed) {
    SampleBatch b;
    b.n = n;
    b.seed = seed;
    for (const auto& ax : j.axes()) {
        b.roles.push_back(ax.role);
        b.alphabets.push_back(ax.alphabet);
        b.columns.emplace_back();
        b.columns.back().reserve(n);
    }
    std::vector<double> cdf(j.size());
    double acc = 0.0;
    for (std::size_t f = 0; f < j.size(); ++f) {
        acc += j.values()[f];
        cdf[f] = acc;
    }
    cdf.back() = 1.0;

    std::mt19937_64 rng(seed);
    std::vector<int> idx(j.axes().size());
    for (std::size_t i = 0; i < n; ++i) {
        double u = u01(rng);
        std::size_t f = static_cast<std::size_t>(
            std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        if (f >= j.size()) f = j.size() - 1;
        j.decode(f, idx);
        for (std::size_t k = 0; k < idx.size(); ++k) b.columns[k].push_back(idx[k]);
    }
    return b;
}

struct CmiEstimate {
    double estimate = 0.0;        // bias-corrected plug-in, bits
    double plug_in = 0.0;         // raw plug-in value
    double stderr_value = 0.0;    // bootstrap standard error
    double bias_correction = 0.0; // additive correction applied to plug_in
    std::size_t n = 0;
    int resamples = 0;
};

namespace detail {

struct CountLayout {
    std::vector<int> axes;     // batch axis per counted dimension
    std::vector<int> group;    // 0=x 1=y 2=z per dimension
    std::vector<std::size_t> stride;
    std::size_t cells = 1;
};

inline double cmi_from_counts(const std::vector<double>& counts, const CountLayout& lay,
                              double n, double* correction) {
    // dimension sizes recovered from strides
    std::vector<std::size_t> dim(lay.axes.size());
    {
        std::size_t prev = lay.cells;
        for (std::size_t k = 0; k < lay.axes.size(); ++k) {
            dim[k] = prev / lay.stride[k];
            prev = lay.stride[k];
        }
    }
    auto build = [&](bool keep_x, bool keep_y, std::vector<std::size_t>& st) {
        std::size_t cells = 1;
        st.assign(lay.axes.size(), 0);
        for (std::size_t k = lay.axes.size(); k-- > 0;) {
            bool keep = lay.group[k] == 2 || (lay.group[k] == 0 && keep_x) ||
                        (lay.group[k] == 1 && keep_y);
            if (keep) {
                st[k] = cells;
                cells *= dim[k];
            }
        }
        return cells;
    };
    std::vector<std::size_t> sxz, syz, sz;
    std::size_t nxz = build(true, false, sxz);
    std::size_t nyz = build(false, true, syz);
    std::size_t nz = build(false, false, sz);

    std::vector<double> cxz(nxz, 0.0), cyz(nyz, 0.0), cz(nz, 0.0);
    std::vector<std::size_t> idx(lay.axes.size());
    for (std::size_t f = 0; f < lay.cells; ++f) {
        double c = counts[f];
        if (c <= 0.0) continue;
        std::size_t rem = f, ixz = 0, iyz = 0, iz = 0;
        for (std::size_t k = 0; k < lay.axes.size(); ++k) {
            std::size_t coord = rem / lay.stride[k];
            rem %= lay.stride[k];
            ixz += coord * sxz[k];
            iyz += coord * syz[k];
            iz += coord * sz[k];
        }
        cxz[ixz] += c;
        cyz[iyz] += c;
        cz[iz] += c;
    }

    double info = 0.0;
    std::size_t k_xyz = 0;
    for (std::size_t f = 0; f < lay.cells; ++f) {
        double c = counts[f];
        if (c <= 0.0) continue;
        ++k_xyz;
        std::size_t rem = f, ixz = 0, iyz = 0, iz = 0;
        for (std::size_t k = 0; k < lay.axes.size(); ++k) {
            std::size_t coord = rem / lay.stride[k];
            rem %= lay.stride[k];
            ixz += coord * sxz[k];
            iyz += coord * syz[k];
            iz += coord * sz[k];
        }
        info += c / n * std::log2(c * cz[iz] / (cxz[ixz] * cyz[iyz]));
    }
    if (correction) {
        std::size_t k_xz = 0, k_yz = 0, k_z = 0;
        for (double c : cxz) k_xz += c > 0.0;
        for (double c : cyz) k_yz += c > 0.0;
        for (double c : cz) k_z += c > 0.0;
        *correction = (static_cast<double>(k_xz) + static_cast<double>(k_yz) -
                       static_cast<double>(k_xyz) - static_cast<double>(k_z)) /
                      (2.0 * n * std::numbers::ln2_v<double>);
    }
    return info;
}

} // namespace detail

// Plug-in conditional information with a first-order bias correction and a
// multinomial bootstrap over the contingency cells.
inline CmiEstimate empirical_cmi(const SampleBatch& b, const std::vector<std::string>& x,
                                 const std::vector<std::string>& y,
                                 const std::vector<std::string>& given, int resamples = 100,
                                 std::uint64_t boot_seed = 0xB00757ull) {
    if (b.n == 0) throw std::invalid_argument("empirical_cmi: empty batch");
    detail::CountLayout lay;
    auto add = [&](const std::vector<std::string>& roles, int grp) {
        for (const auto& r : roles) {
            lay.axes.push_back(b.axis_index(r));
            lay.group.push_back(grp);
        }
    };
    add(x, 0);
    add(y, 1);
    add(given, 2);
    lay.stride.assign(lay.axes.size(), 1);
    for (std::size_t k = lay.axes.size(); k-- > 1;)
        lay.stride[k - 1] =
            lay.stride[k] *
            static_cast<std::size_t>(b.alphabets[static_cast<std::size_t>(lay.axes[k])].size());
    lay.cells = lay.stride[0] * static_cast<std::size_t>(
                                    b.alphabets[static_cast<std::size_t>(lay.axes[0])].size());

    std::vector<double> counts(lay.cells, 0.0);
    for (std::size_t i = 0; i < b.n; ++i) {
        std::size_t f = 0;
        for (std::size_t k = 0; k < lay.axes.size(); ++k)
            f += static_cast<std::size_t>(
                     b.columns[static_cast<std::size_t>(lay.axes[k])][i]) *
                 lay.stride[k];
        counts[f] += 1.0;
    }

    CmiEstimate est;
    est.n = b.n;
    est.resamples = resamples;
    est.plug_in = detail::cmi_from_counts(counts, lay, static_cast<double>(b.n), &est.bias_correction);
    est.estimate = est.plug_in + est.bias_correction;

    if (resamples > 1) {
        // bootstrap by resampling cells from the empirical distribution
        std::vector<double> cdf(lay.cells);
        double acc = 0.0;
        for (std::size_t f = 0; f < lay.cells; ++f) {
            acc += counts[f] / static_cast<double>(b.n);
            cdf[f] = acc;
        }
        cdf.back() = 1.0;
        std::vector<double> values(static_cast<std::size_t>(resamples));
        parallel_for(static_cast<std::size_t>(resamples), [&](std::size_t r) {
            std::mt19937_64 rng(mix_seed(boot_seed, r));
            std::vector<double> rc(lay.cells, 0.0);
            for (std::size_t i = 0; i < b.n; ++i) {
                double u = u01(rng);
                std::size_t f = static_cast<std::size_t>(
                    std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
                if (f >= lay.cells) f = lay.cells - 1;
                rc[f] += 1.0;
            }
            double corr = 0.0;
            double v = detail::cmi_from_counts(rc, lay, static_cast<double>(b.n), &corr);
            values[r] = v + corr;
        });
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= resamples;
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        est.stderr_value = std::sqrt(var / (resamples - 1));
    }
    return est;
}

// ---- toy rate-splitting codec ----------------------------------------------------

struct CodecConfig {
    double rate1 = 0.0;  // action-codebook rate, bits per symbol
    double rate2 = 0.0;  // input-codebook rate
    int block_length = 8;
    double epsilon = 0.1; // typicality slack
    int trials = 1000;
    double work_cap = 5e8;
};

struct CodecReport {
    double error_rate = 0.0;
    double stage1_error_rate = 0.0;
    double stderr_value = 0.0;
    int m1_count = 0, m2_count = 0;
    int trials = 0;
    std::uint64_t seed = 0;
    CodecConfig config;
};

namespace detail {

inline int sample_index(std::span<const double> dist, std::mt19937_64& rng) {
    double u = u01(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        acc += dist[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(dist.size()) - 1;
}

// |count - n_ref * p| <= eps * n_ref * p per cell, zero-probability cells empty
inline bool strongly_typical(std::span<const int> counts, std::span<const double> probs,
                             double n_ref, double eps) {
    for (std::size_t i = 0; i < probs.size(); ++i) {
        double expect = n_ref * probs[i];
        if (probs[i] <= kZeroFloor) {
            if (counts[i] != 0) return false;
        } else if (std::abs(counts[i] - expect) > eps * expect) {
            return false;
        }
    }
    return true;
}

} // namespace detail

// Runs the two-stage scheme literally: an action codebook drawn i.i.d. from
// the action distribution, per-observation input codebooks drawn from the
// row distributions, multiplexing on the observed symbol, and successive
// smallest-index typicality decoding. Fresh codebooks per trial.
inline CodecReport rate_split_codec(const ProbingModel& m, const std::vector<double>& action,
                                    const std::vector<std::vector<double>>& rows_by_se,
                                    const CodecConfig& cfg, std::uint64_t seed) {
    if (!m.encoder_only()) throw std::invalid_argument("rate_split_codec: model has decoder actions");
    if (!m.decoder_has_full_csi())
        throw std::invalid_argument("rate_split_codec: decoder must observe the state");
    if (cfg.block_length < 1 || cfg.block_length > 16)
        throw std::invalid_argument("rate_split_codec: block length must be in [1,16]");
    if (cfg.trials < 1 || cfg.epsilon <= 0.0) throw std::invalid_argument("rate_split_codec: bad config");
    if (rows_by_se.size() != static_cast<std::size_t>(m.Se.size()))
        throw std::invalid_argument("rate_split_codec: need one input row per observable symbol");
    // the decoder recovers the encoder's observation from (state, action)
    for (int s = 0; s < m.S.size(); ++s)
        for (int a = 0; a < m.Ae.size(); ++a) {
            double mx = 0.0;
            for (int se = 0; se < m.Se.size(); ++se)
                mx = std::max(mx, m.encoder_probe_prob(s, a, 0, se));
            if (mx < 1.0 - 1e-9)
                throw std::invalid_argument("rate_split_codec: encoder probe must be deterministic");
        }

    const int n = cfg.block_length;
    const int m1_count = std::max(1, static_cast<int>(std::lround(std::pow(2.0, n * cfg.rate1))));
    const int m2_count = std::max(1, static_cast<int>(std::lround(std::pow(2.0, n * cfg.rate2))));
    double work = static_cast<double>(m1_count) * m2_count * cfg.trials * n;
    if (work > cfg.work_cap)
        throw std::invalid_argument("rate_split_codec: work " + std::to_string(work) +
                                    " exceeds cap " + std::to_string(cfg.work_cap));

    const int ns = m.S.size(), nse = m.Se.size(), ny = m.Y.size(), na = m.Ae.size();
    const int nx = m.X.size();

    // reference laws for the typicality tests
    std::vector<double> p_ays(static_cast<std::size_t>(na * ny * ns), 0.0); // P(a,y,s)
    std::vector<double> p_xy_sa(static_cast<std::size_t>(ns * na * nx * ny), 0.0); // P(x,y|s,a)
    for (int s = 0; s < ns; ++s)
        for (int a = 0; a < na; ++a) {
            double ps = m.state.mass[static_cast<std::size_t>(s)];
            for (int se = 0; se < nse; ++se) {
                double pse = m.encoder_probe_prob(s, a, 0, se);
                if (pse <= 0.0) continue;
                for (int x = 0; x < nx; ++x) {
                    double px = rows_by_se[static_cast<std::size_t>(se)][static_cast<std::size_t>(x)];
                    if (px <= 0.0) continue;
                    for (int y = 0; y < ny; ++y) {
                        double w = m.channel_prob(x, s, y);
                        p_ays[static_cast<std::size_t>((a * ny + y) * ns + s)] +=
                            action[static_cast<std::size_t>(a)] * ps * pse * px * w;
                        p_xy_sa[static_cast<std::size_t>(((s * na + a) * nx + x) * ny + y)] +=
                            pse * px * w;
                    }
                }
            }
        }

    std::vector<std::uint8_t> stage1_err(static_cast<std::size_t>(cfg.trials), 0);
    std::vector<std::uint8_t> total_err(static_cast<std::size_t>(cfg.trials), 0);

    parallel_for(static_cast<std::size_t>(cfg.trials), [&](std::size_t trial) {
        std::mt19937_64 rng(mix_seed(seed, trial));

        // codebooks
        std::vector<int> ca(static_cast<std::size_t>(m1_count * n));
        for (auto& a : ca) a = detail::sample_index(action, rng);
        // per (m1, m2, se) input codewords
        std::vector<int> cx(static_cast<std::size_t>(m1_count) * m2_count * nse * n);
        for (int i1 = 0; i1 < m1_count; ++i1)
            for (int i2 = 0; i2 < m2_count; ++i2)
                for (int se = 0; se < nse; ++se)
                    for (int i = 0; i < n; ++i)
                        cx[((static_cast<std::size_t>(i1) * m2_count + i2) * nse + se) * n + i] =
                            detail::sample_index(rows_by_se[static_cast<std::size_t>(se)], rng);
        // fallback codebook used when the action word is atypical
        std::vector<int> cx0(static_cast<std::size_t>(m2_count * n));
        for (auto& x : cx0) x = detail::sample_index(rows_by_se[0], rng);

        int msg1 = static_cast<int>(rng() % static_cast<std::uint64_t>(m1_count));
        int msg2 = static_cast<int>(rng() % static_cast<std::uint64_t>(m2_count));

        // action typicality check at the encoder
        std::vector<int> acounts(static_cast<std::size_t>(na), 0);
        for (int i = 0; i < n; ++i) ++acounts[static_cast<std::size_t>(ca[static_cast<std::size_t>(msg1 * n + i)])];
        bool a_typical = detail::strongly_typical(acounts, action, n, cfg.epsilon);

        std::vector<int> a_used(static_cast<std::size_t>(n), 0);
        if (a_typical)
            for (int i = 0; i < n; ++i) a_used[static_cast<std::size_t>(i)] = ca[static_cast<std::size_t>(msg1 * n + i)];

        // nature
        std::vector<int> s_seq(static_cast<std::size_t>(n)), se_seq(static_cast<std::size_t>(n));
        std::vector<int> x_seq(static_cast<std::size_t>(n)), y_seq(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            s_seq[static_cast<std::size_t>(i)] = detail::sample_index(m.state.mass, rng);
            // observed symbol from the probe kernel
            std::vector<double> pse(static_cast<std::size_t>(nse));
            for (int se = 0; se < nse; ++se)
                pse[static_cast<std::size_t>(se)] =
                    m.encoder_probe_prob(s_seq[static_cast<std::size_t>(i)],
                                         a_used[static_cast<std::size_t>(i)], 0, se);
            se_seq[static_cast<std::size_t>(i)] = detail::sample_index(pse, rng);
            int x;
            if (a_typical)
                x = cx[((static_cast<std::size_t>(msg1) * m2_count + msg2) * nse +
                        se_seq[static_cast<std::size_t>(i)]) * n + static_cast<std::size_t>(i)];
            else
                x = cx0[static_cast<std::size_t>(msg2 * n + i)];
            x_seq[static_cast<std::size_t>(i)] = x;
            std::vector<double> py(static_cast<std::size_t>(ny));
            for (int y = 0; y < ny; ++y)
                py[static_cast<std::size_t>(y)] = m.channel_prob(x, s_seq[static_cast<std::size_t>(i)], y);
            y_seq[static_cast<std::size_t>(i)] = detail::sample_index(py, rng);
        }

        // stage 1: smallest action index jointly typical with (Y,S)
        int dec1 = 0; // default when nothing passes
        std::vector<int> counts(static_cast<std::size_t>(na * ny * ns));
        bool found1 = false;
        for (int c1 = 0; c1 < m1_count && !found1; ++c1) {
            std::fill(counts.begin(), counts.end(), 0);
            for (int i = 0; i < n; ++i)
                ++counts[static_cast<std::size_t>(
                    (ca[static_cast<std::size_t>(c1 * n + i)] * ny + y_seq[static_cast<std::size_t>(i)]) * ns +
                    s_seq[static_cast<std::size_t>(i)])];
            if (detail::strongly_typical(counts, p_ays, n, cfg.epsilon)) {
                dec1 = c1;
                found1 = true;
            }
        }
        if (dec1 != msg1) stage1_err[trial] = 1;

        // stage 2: demultiplex with the decoded action word, then smallest
        // input index conditionally typical with Y given (S, A)
        std::vector<int> a_hat(static_cast<std::size_t>(n), 0);
        std::vector<int> ahat_counts(static_cast<std::size_t>(na), 0);
        for (int i = 0; i < n; ++i) {
            a_hat[static_cast<std::size_t>(i)] = ca[static_cast<std::size_t>(dec1 * n + i)];
            ++ahat_counts[static_cast<std::size_t>(a_hat[static_cast<std::size_t>(i)])];
        }
        bool ahat_typical = detail::strongly_typical(ahat_counts, action, n, cfg.epsilon);

        int dec2 = 0;
        bool found2 = false;
        std::vector<int> c2counts(static_cast<std::size_t>(nx * ny));
        std::vector<double> ref(static_cast<std::size_t>(nx * ny));
        for (int c2 = 0; c2 < m2_count && !found2; ++c2) {
            // per-(s,a) conditional typicality of (x(c2), y)
            bool ok = true;
            for (int s = 0; s < ns && ok; ++s)
                for (int a = 0; a < na && ok; ++a) {
                    std::fill(c2counts.begin(), c2counts.end(), 0);
                    int n_sa = 0;
                    for (int i = 0; i < n; ++i) {
                        if (s_seq[static_cast<std::size_t>(i)] != s ||
                            a_hat[static_cast<std::size_t>(i)] != a)
                            continue;
                        ++n_sa;
                        int se = 0;
                        if (ahat_typical) {
                            // decoder reconstructs the observation from (s, a)
                            std::vector<double> pse(static_cast<std::size_t>(nse));
                            for (int k = 0; k < nse; ++k)
                                pse[static_cast<std::size_t>(k)] = m.encoder_probe_prob(s, a, 0, k);
                            se = static_cast<int>(std::max_element(pse.begin(), pse.end()) -
                                                  pse.begin());
                        }
                        int x = ahat_typical
                                    ? cx[((static_cast<std::size_t>(dec1) * m2_count + c2) * nse + se) * n +
                                         static_cast<std::size_t>(i)]
                                    : cx0[static_cast<std::size_t>(c2 * n + i)];
                        ++c2counts[static_cast<std::size_t>(x * ny + y_seq[static_cast<std::size_t>(i)])];
                    }
                    if (n_sa == 0) continue;
                    for (int x = 0; x < nx; ++x)
                        for (int y = 0; y < ny; ++y)
                            ref[static_cast<std::size_t>(x * ny + y)] =
                                p_xy_sa[static_cast<std::size_t>(((s * na + a) * nx + x) * ny + y)];
                    if (!detail::strongly_typical(c2counts, ref, n_sa, cfg.epsilon)) ok = false;
                }
            if (ok) {
                dec2 = c2;
                found2 = true;
            }
        }
        if (dec1 != msg1 || dec2 != msg2) total_err[trial] = 1;
    });

    CodecReport rep;
    rep.config = cfg;
    rep.seed = seed;
    rep.trials = cfg.trials;
    rep.m1_count = m1_count;
    rep.m2_count = m2_count;
    int e1 = 0, et = 0;
    for (int t = 0; t < cfg.trials; ++t) {
        e1 += stage1_err[static_cast<std::size_t>(t)];
        et += total_err[static_cast<std::size_t>(t)];
    }
    rep.stage1_error_rate = static_cast<double>(e1) / cfg.trials;
    rep.error_rate = static_cast<double>(et) / cfg.trials;
    rep.stderr_value = std::sqrt(rep.error_rate * (1.0 - rep.error_rate) / cfg.trials);
    return rep;
}

// input rows keyed by observable symbol, extracted from an encoder-side
// solve: observed symbols take their own row, the erasure row is the
// no-probe row.
inline std::vector<std::vector<double>> rows_by_observation(const ProbingModel& m,
                                                            const SolveResult& r) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.Se.size()),
                                          std::vector<double>(static_cast<std::size_t>(m.X.size()),
                                                              1.0 / m.X.size()));
    for (std::size_t j = 0; j < r.row_keys.size(); ++j) {
        auto [se, a] = r.row_keys[j];
        // prefer the row belonging to the action that actually reaches se
        double reach = 0.0;
        for (int s = 0; s < m.S.size(); ++s)
            reach += m.state.mass[static_cast<std::size_t>(s)] *
                     m.encoder_probe_prob(s, a, 0, se);
        if (reach > 1e-12 && r.action[static_cast<std::size_t>(a)] > 1e-12)
            rows[static_cast<std::size_t>(se)] = r.rows[j];
    }
    return rows;
}

} // namespace probecap
