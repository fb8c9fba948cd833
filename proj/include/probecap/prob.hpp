#pragma once

// Finite-alphabet probability primitives: distributions, conditional kernels,
// dense joint tables, and the information measures computed from them.
// All information quantities are in bits (log base 2).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace probecap {

inline constexpr double kDistTol = 1e-12;   // row/dist normalization
inline constexpr double kMassTol = 1e-10;   // joint-table total mass
inline constexpr double kInfoTol = 1e-9;    // information identities
inline constexpr double kZeroFloor = 1e-15; // below this, treated as exact zero in logs

// x*log2(x) with the 0*log 0 = 0 convention.
inline double plog2p(double p) {
    if (p <= kZeroFloor) return 0.0;
    return p * std::log2(p);
}

inline double binary_entropy(double p) {
    if (p < -kDistTol || p > 1.0 + kDistTol)
        throw std::domain_error("binary_entropy: p outside [0,1]: " + std::to_string(p));
    p = std::clamp(p, 0.0, 1.0);
    return -plog2p(p) - plog2p(1.0 - p);
}

struct Alphabet {
    std::string name;
    std::vector<std::string> symbols;

    Alphabet() = default;
    Alphabet(std::string name_, std::vector<std::string> symbols_)
        : name(std::move(name_)), symbols(std::move(symbols_)) {
        if (symbols.empty())
            throw std::invalid_argument("Alphabet '" + name + "': no symbols");
        for (std::size_t i = 0; i < symbols.size(); ++i)
            for (std::size_t j = i + 1; j < symbols.size(); ++j)
                if (symbols[i] == symbols[j])
                    throw std::invalid_argument("Alphabet '" + name +
                                                "': duplicate symbol '" + symbols[i] + "'");
    }

    int size() const { return static_cast<int>(symbols.size()); }

    int index_of(const std::string& sym) const {
        for (std::size_t i = 0; i < symbols.size(); ++i)
            if (symbols[i] == sym) return static_cast<int>(i);
        throw std::invalid_argument("Alphabet '" + name + "': unknown symbol '" + sym + "'");
    }

    friend bool operator==(const Alphabet& a, const Alphabet& b) {
        return a.name == b.name && a.symbols == b.symbols;
    }
};

// Convenience builder for numeric alphabets {0,1,...,n-1}.
inline Alphabet make_alphabet(std::string name, int n) {
    std::vector<std::string> syms;
    syms.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) syms.push_back(std::to_string(i));
    return Alphabet(std::move(name), std::move(syms));
}

inline void check_distribution(std::span<const double> mass, double tol, const std::string& what) {
    double sum = 0.0;
    for (double p : mass) {
        if (!(p >= -tol) || !(p <= 1.0 + tol) || !std::isfinite(p))
            throw std::invalid_argument(what + ": entry outside [0,1]: " + std::to_string(p));
        sum += p;
    }
    if (std::abs(sum - 1.0) > tol)
        throw std::invalid_argument(what + ": mass sums to " + std::to_string(sum));
}

struct ProbDist {
    Alphabet alphabet;
    std::vector<double> mass;

    ProbDist() = default;
    ProbDist(Alphabet a, std::vector<double> m) : alphabet(std::move(a)), mass(std::move(m)) {
        if (static_cast<int>(mass.size()) != alphabet.size())
            throw std::invalid_argument("ProbDist over '" + alphabet.name + "': size mismatch");
        check_distribution(mass, kDistTol, "ProbDist over '" + alphabet.name + "'");
    }

    static ProbDist uniform(Alphabet a) {
        std::vector<double> m(static_cast<std::size_t>(a.size()), 1.0 / a.size());
        return ProbDist(std::move(a), std::move(m));
    }

    static ProbDist point_mass(Alphabet a, int index) {
        if (index < 0 || index >= a.size())
            throw std::invalid_argument("point_mass: index out of range");
        std::vector<double> m(static_cast<std::size_t>(a.size()), 0.0);
        m[static_cast<std::size_t>(index)] = 1.0;
        return ProbDist(std::move(a), std::move(m));
    }
};

inline double entropy(const ProbDist& d) {
    double h = 0.0;
    for (double p : d.mass) h -= plog2p(p);
    return h;
}

inline double entropy_of(std::span<const double> mass) {
    double h = 0.0;
    for (double p : mass) h -= plog2p(p);
    return h;
}

// Conditional kernel: one distribution over the product of `outputs` per
// input tuple. Rows are indexed row-major over `inputs`, row entries
// row-major over `outputs`. A single output alphabet is the common case;
// the probe kernel uses two.
struct CondKernel {
    std::vector<Alphabet> inputs;
    std::vector<Alphabet> outputs;
    std::vector<std::vector<double>> rows;

    CondKernel() = default;
    CondKernel(std::vector<Alphabet> in, std::vector<Alphabet> out,
               std::vector<std::vector<double>> r)
        : inputs(std::move(in)), outputs(std::move(out)), rows(std::move(r)) {
        if (outputs.empty()) throw std::invalid_argument("CondKernel: no output alphabet");
        if (rows.size() != static_cast<std::size_t>(input_count()))
            throw std::invalid_argument("CondKernel: expected " + std::to_string(input_count()) +
                                        " rows, got " + std::to_string(rows.size()));
        const std::size_t w = static_cast<std::size_t>(output_count());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != w)
                throw std::invalid_argument("CondKernel row " + std::to_string(i) + ": width mismatch");
            check_distribution(rows[i], kDistTol, "CondKernel row " + std::to_string(i));
        }
    }

    int input_count() const {
        int n = 1;
        for (const auto& a : inputs) n *= a.size();
        return n;
    }
    int output_count() const {
        int n = 1;
        for (const auto& a : outputs) n *= a.size();
        return n;
    }

    int row_index(std::span<const int> in) const {
        if (in.size() != inputs.size())
            throw std::invalid_argument("CondKernel::row_index: arity mismatch");
        int idx = 0;
        for (std::size_t k = 0; k < inputs.size(); ++k) {
            if (in[k] < 0 || in[k] >= inputs[k].size())
                throw std::invalid_argument("CondKernel::row_index: index out of range");
            idx = idx * inputs[k].size() + in[k];
        }
        return idx;
    }

    double prob(std::span<const int> in, std::span<const int> out) const {
        int o = 0;
        for (std::size_t k = 0; k < outputs.size(); ++k)
            o = o * outputs[k].size() + out[k];
        return rows[static_cast<std::size_t>(row_index(in))][static_cast<std::size_t>(o)];
    }
};

struct Axis {
    std::string role;
    Alphabet alphabet;
};

// Dense probability tensor over named axes.
class JointTable {
public:
    JointTable() = default;
    JointTable(std::vector<Axis> axes, std::vector<double> mass)
        : axes_(std::move(axes)), mass_(std::move(mass)) {
        init_strides();
        if (mass_.size() != cells_)
            throw std::invalid_argument("JointTable: mass size mismatch");
        double total = 0.0;
        for (double p : mass_) {
            if (!(p >= -kDistTol) || !std::isfinite(p))
                throw std::invalid_argument("JointTable: negative or non-finite mass");
            total += p;
        }
        if (std::abs(total - 1.0) > kMassTol)
            throw std::invalid_argument("JointTable: total mass " + std::to_string(total));
    }

    const std::vector<Axis>& axes() const { return axes_; }
    std::size_t size() const { return cells_; }
    std::span<const double> values() const { return mass_; }

    int axis_index(const std::string& role) const {
        for (std::size_t i = 0; i < axes_.size(); ++i)
            if (axes_[i].role == role) return static_cast<int>(i);
        throw std::invalid_argument("JointTable: unknown axis '" + role + "'");
    }

    bool has_axis(const std::string& role) const {
        for (const auto& a : axes_)
            if (a.role == role) return true;
        return false;
    }

    double at(std::span<const int> idx) const { return mass_[flat(idx)]; }

    std::size_t flat(std::span<const int> idx) const {
        if (idx.size() != axes_.size())
            throw std::invalid_argument("JointTable::flat: arity mismatch");
        std::size_t f = 0;
        for (std::size_t k = 0; k < axes_.size(); ++k) {
            if (idx[k] < 0 || idx[k] >= axes_[k].alphabet.size())
                throw std::invalid_argument("JointTable::flat: index out of range");
            f += static_cast<std::size_t>(idx[k]) * strides_[k];
        }
        return f;
    }

    void decode(std::size_t flat_idx, std::span<int> idx_out) const {
        for (std::size_t k = 0; k < axes_.size(); ++k) {
            idx_out[k] = static_cast<int>(flat_idx / strides_[k]);
            flat_idx %= strides_[k];
        }
    }

    double total_mass() const { return std::accumulate(mass_.begin(), mass_.end(), 0.0); }

private:
    void init_strides() {
        if (axes_.empty()) throw std::invalid_argument("JointTable: no axes");
        strides_.assign(axes_.size(), 1);
        for (std::size_t k = axes_.size(); k-- > 1;)
            strides_[k - 1] = strides_[k] * static_cast<std::size_t>(axes_[k].alphabet.size());
        cells_ = strides_[0] * static_cast<std::size_t>(axes_[0].alphabet.size());
    }

    std::vector<Axis> axes_;
    std::vector<double> mass_;
    std::vector<std::size_t> strides_;
    std::size_t cells_ = 0;
};

// Sum out the named axes. Keeps the relative order of the remaining axes.
inline JointTable marginalize(const JointTable& j, std::span<const std::string> drop) {
    for (const auto& r : drop) (void)j.axis_index(r); // validate names
    std::vector<bool> dropped(j.axes().size(), false);
    for (const auto& r : drop) dropped[static_cast<std::size_t>(j.axis_index(r))] = true;

    std::vector<Axis> kept;
    std::vector<std::size_t> kept_pos;
    for (std::size_t k = 0; k < j.axes().size(); ++k)
        if (!dropped[k]) {
            kept.push_back(j.axes()[k]);
            kept_pos.push_back(k);
        }
    if (kept.empty())
        throw std::invalid_argument("marginalize: cannot drop every axis");

    std::vector<std::size_t> out_strides(kept.size(), 1);
    for (std::size_t k = kept.size(); k-- > 1;)
        out_strides[k - 1] = out_strides[k] * static_cast<std::size_t>(kept[k].alphabet.size());
    std::size_t out_cells = out_strides[0] * static_cast<std::size_t>(kept[0].alphabet.size());

    std::vector<double> out(out_cells, 0.0);
    std::vector<int> idx(j.axes().size());
    for (std::size_t f = 0; f < j.size(); ++f) {
        j.decode(f, idx);
        std::size_t of = 0;
        for (std::size_t k = 0; k < kept_pos.size(); ++k)
            of += static_cast<std::size_t>(idx[kept_pos[k]]) * out_strides[k];
        out[of] += j.values()[f];
    }
    return JointTable(std::move(kept), std::move(out));
}

inline JointTable marginalize(const JointTable& j, std::initializer_list<std::string> drop) {
    std::vector<std::string> v(drop);
    return marginalize(j, std::span<const std::string>(v));
}

// Marginal onto the named axes (complement of marginalize).
inline JointTable marginal_onto(const JointTable& j, std::span<const std::string> keep) {
    for (const auto& r : keep) (void)j.axis_index(r);
    std::vector<std::string> drop;
    for (const auto& a : j.axes()) {
        bool k = false;
        for (const auto& r : keep)
            if (r == a.role) k = true;
        if (!k) drop.push_back(a.role);
    }
    if (drop.empty()) return j;
    return marginalize(j, std::span<const std::string>(drop));
}

inline JointTable marginal_onto(const JointTable& j, std::initializer_list<std::string> keep) {
    std::vector<std::string> v(keep);
    return marginal_onto(j, std::span<const std::string>(v));
}

inline double joint_entropy(const JointTable& j) {
    double h = 0.0;
    for (double p : j.values()) h -= plog2p(p);
    return h;
}

// I(X;Y|Z) for axis groups X, Y and conditioning set Z.
// Groups must name distinct axes of j.
inline double conditional_mutual_information(const JointTable& j,
                                             std::span<const std::string> x,
                                             std::span<const std::string> y,
                                             std::span<const std::string> given) {
    if (x.empty() || y.empty())
        throw std::invalid_argument("conditional_mutual_information: empty axis group");
    std::vector<std::string> all;
    auto add_unique = [&](std::span<const std::string> g) {
        for (const auto& r : g) {
            (void)j.axis_index(r);
            for (const auto& seen : all)
                if (seen == r)
                    throw std::invalid_argument("conditional_mutual_information: axis '" + r +
                                                "' repeated across groups");
            all.push_back(r);
        }
    };
    add_unique(x);
    add_unique(y);
    add_unique(given);

    JointTable xyz = marginal_onto(j, std::span<const std::string>(all));

    // membership of each xyz axis in the x / y / z groups
    const std::size_t n = xyz.axes().size();
    std::vector<int> group(n, 2); // 0 = x, 1 = y, 2 = z
    for (std::size_t k = 0; k < n; ++k) {
        const std::string& role = xyz.axes()[k].role;
        for (const auto& r : x)
            if (r == role) group[k] = 0;
        for (const auto& r : y)
            if (r == role) group[k] = 1;
    }

    // strides of the (x,z), (y,z) and (z) marginals, aligned to xyz axes
    auto build = [&](bool keep_x, bool keep_y) {
        std::vector<std::size_t> strides(n, 0);
        std::size_t cells = 1;
        for (std::size_t k = n; k-- > 0;) {
            bool keep = (group[k] == 2) || (group[k] == 0 && keep_x) || (group[k] == 1 && keep_y);
            if (keep) {
                strides[k] = cells;
                cells *= static_cast<std::size_t>(xyz.axes()[k].alphabet.size());
            }
        }
        return std::pair<std::vector<std::size_t>, std::size_t>(std::move(strides), cells);
    };
    auto [sxz, nxz] = build(true, false);
    auto [syz, nyz] = build(false, true);
    auto [sz, nz] = build(false, false);
    if (nz == 0) nz = 1;

    std::vector<double> pxz(nxz, 0.0), pyz(nyz, 0.0), pz(nz, 0.0);
    std::vector<int> idx(n);
    for (std::size_t f = 0; f < xyz.size(); ++f) {
        double p = xyz.values()[f];
        if (p <= 0.0) continue;
        xyz.decode(f, idx);
        std::size_t ixz = 0, iyz = 0, iz = 0;
        for (std::size_t k = 0; k < n; ++k) {
            ixz += static_cast<std::size_t>(idx[k]) * sxz[k];
            iyz += static_cast<std::size_t>(idx[k]) * syz[k];
            iz += static_cast<std::size_t>(idx[k]) * sz[k];
        }
        pxz[ixz] += p;
        pyz[iyz] += p;
        pz[iz] += p;
    }

    double info = 0.0;
    for (std::size_t f = 0; f < xyz.size(); ++f) {
        double p = xyz.values()[f];
        if (p <= kZeroFloor) continue;
        xyz.decode(f, idx);
        std::size_t ixz = 0, iyz = 0, iz = 0;
        for (std::size_t k = 0; k < n; ++k) {
            ixz += static_cast<std::size_t>(idx[k]) * sxz[k];
            iyz += static_cast<std::size_t>(idx[k]) * syz[k];
            iz += static_cast<std::size_t>(idx[k]) * sz[k];
        }
        info += p * std::log2(p * pz[iz] / (pxz[ixz] * pyz[iyz]));
    }
    // tiny negatives are accumulation noise
    if (info < 0.0 && info > -kInfoTol) info = 0.0;
    return info;
}

inline double conditional_mutual_information(const JointTable& j, const std::string& x,
                                             const std::string& y,
                                             std::initializer_list<std::string> given = {}) {
    std::vector<std::string> xs{x}, ys{y}, gs(given);
    return conditional_mutual_information(j, std::span<const std::string>(xs),
                                          std::span<const std::string>(ys),
                                          std::span<const std::string>(gs));
}

inline double mutual_information(const JointTable& j, const std::string& x, const std::string& y) {
    return conditional_mutual_information(j, x, y, {});
}

// ---- chain-rule composition -------------------------------------------------

// A new axis carrying an unconditioned distribution.
struct DistFactor {
    std::string axis;
    ProbDist dist;
};

// New axes drawn from a kernel conditioned on earlier axes.
struct KernelFactor {
    std::vector<std::string> given;
    std::vector<std::string> out;
    CondKernel kernel;
};

// A deterministic map contributing an indicator factor.
struct MapFactor {
    std::vector<std::string> given;
    std::string out;
    Alphabet alphabet;
    std::function<int(std::span<const int>)> fn;
};

using Factor = std::variant<DistFactor, KernelFactor, MapFactor>;

// Chain-rule product of the factors, in order. Every conditioning axis must
// be introduced by an earlier factor.
inline JointTable compose(const std::vector<Factor>& factors) {
    std::vector<Axis> axes;
    auto find_axis = [&](const std::string& role) -> int {
        for (std::size_t i = 0; i < axes.size(); ++i)
            if (axes[i].role == role) return static_cast<int>(i);
        return -1;
    };
    auto add_axis = [&](const std::string& role, const Alphabet& a) {
        if (find_axis(role) >= 0)
            throw std::invalid_argument("compose: axis '" + role + "' defined twice");
        axes.push_back(Axis{role, a});
    };

    struct Applied {
        std::vector<int> given_pos;
        std::vector<int> out_pos;
        const Factor* src;
    };
    std::vector<Applied> plan;

    for (const auto& f : factors) {
        Applied ap;
        ap.src = &f;
        if (const auto* d = std::get_if<DistFactor>(&f)) {
            add_axis(d->axis, d->dist.alphabet);
            ap.out_pos.push_back(find_axis(d->axis));
        } else if (const auto* k = std::get_if<KernelFactor>(&f)) {
            if (k->given.size() != k->kernel.inputs.size() ||
                k->out.size() != k->kernel.outputs.size())
                throw std::invalid_argument("compose: kernel arity mismatch");
            for (std::size_t i = 0; i < k->given.size(); ++i) {
                int pos = find_axis(k->given[i]);
                if (pos < 0)
                    throw std::invalid_argument("compose: dangling conditioning axis '" +
                                                k->given[i] + "'");
                if (!(axes[static_cast<std::size_t>(pos)].alphabet == k->kernel.inputs[i]))
                    throw std::invalid_argument("compose: kernel input alphabet mismatch on '" +
                                                k->given[i] + "'");
                ap.given_pos.push_back(pos);
            }
            for (std::size_t i = 0; i < k->out.size(); ++i) {
                add_axis(k->out[i], k->kernel.outputs[i]);
                ap.out_pos.push_back(find_axis(k->out[i]));
            }
        } else {
            const auto& m = std::get<MapFactor>(f);
            for (const auto& g : m.given) {
                int pos = find_axis(g);
                if (pos < 0)
                    throw std::invalid_argument("compose: dangling conditioning axis '" + g + "'");
                ap.given_pos.push_back(pos);
            }
            add_axis(m.out, m.alphabet);
            ap.out_pos.push_back(find_axis(m.out));
        }
        plan.push_back(std::move(ap));
    }

    std::vector<std::size_t> strides(axes.size(), 1);
    for (std::size_t k = axes.size(); k-- > 1;)
        strides[k - 1] = strides[k] * static_cast<std::size_t>(axes[k].alphabet.size());
    std::size_t cells = strides[0] * static_cast<std::size_t>(axes[0].alphabet.size());

    std::vector<double> mass(cells);
    std::vector<int> idx(axes.size());
    std::vector<int> in_buf, out_buf;
    for (std::size_t f = 0; f < cells; ++f) {
        std::size_t rem = f;
        for (std::size_t k = 0; k < axes.size(); ++k) {
            idx[k] = static_cast<int>(rem / strides[k]);
            rem %= strides[k];
        }
        double p = 1.0;
        for (const auto& ap : plan) {
            if (p == 0.0) break;
            if (const auto* d = std::get_if<DistFactor>(ap.src)) {
                p *= d->dist.mass[static_cast<std::size_t>(idx[ap.out_pos[0]])];
            } else if (const auto* k = std::get_if<KernelFactor>(ap.src)) {
                in_buf.clear();
                for (int pos : ap.given_pos) in_buf.push_back(idx[pos]);
                out_buf.clear();
                for (int pos : ap.out_pos) out_buf.push_back(idx[pos]);
                p *= k->kernel.prob(in_buf, out_buf);
            } else {
                const auto& m = std::get<MapFactor>(*ap.src);
                in_buf.clear();
                for (int pos : ap.given_pos) in_buf.push_back(idx[pos]);
                int want = m.fn(in_buf);
                if (want < 0 || want >= m.alphabet.size())
                    throw std::invalid_argument("compose: map '" + m.out + "' out of range");
                if (idx[ap.out_pos[0]] != want) p = 0.0;
            }
        }
        mass[f] = p;
    }
    return JointTable(std::move(axes), std::move(mass));
}

} // namespace probecap
