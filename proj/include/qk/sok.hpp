// sok.hpp - states of knowledge: environment spaces, classical and
// pure-quantum representatives, formal differences, and the commutative
// algebra operations on them.
//
// Classical representatives are stored column-wise as weight * normalized
// distribution, which makes the rescaling relation a structural no-op and
// canonicalization a sort+merge. Quantum representatives are stored as the
// PSD gram / reduced-density matrix over the environment, where equivalence
// is plain matrix equality.
#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "qk/eig.hpp"
#include "qk/matrix.hpp"
#include "qk/scalar.hpp"

namespace qk {

// --------------------------------------------------------------------------
// Environment spaces

struct EnvFactor {
    std::string name;
    std::vector<std::string> labels;

    friend bool operator==(const EnvFactor&, const EnvFactor&) = default;
};

class EnvSpace {
   public:
    EnvSpace() = default;

    static EnvSpace simple(std::vector<std::string> labels, std::string name = "E") {
        if (labels.empty()) throw error(errc::dimension_mismatch, "empty environment");
        EnvSpace e;
        e.factors_.push_back({std::move(name), std::move(labels)});
        return e;
    }

    static EnvSpace indexed(std::size_t n, const std::string& name = "E") {
        std::vector<std::string> labels(n);
        for (std::size_t i = 0; i < n; ++i) labels[i] = std::to_string(i);
        return simple(std::move(labels), name);
    }

    static EnvSpace product(const EnvSpace& a, const EnvSpace& b) {
        EnvSpace e;
        e.factors_ = a.factors_;
        for (const auto& f : b.factors_) {
            for (const auto& g : e.factors_)
                if (g.name == f.name)
                    throw error(errc::unknown_register, "duplicate register name: " + f.name);
            e.factors_.push_back(f);
        }
        return e;
    }

    static EnvSpace from_factors(std::vector<EnvFactor> factors) {
        if (factors.empty()) throw error(errc::dimension_mismatch, "empty environment");
        EnvSpace e;
        e.factors_ = std::move(factors);
        return e;
    }

    std::size_t size() const {
        std::size_t n = 1;
        for (const auto& f : factors_) n *= f.labels.size();
        return n;
    }

    const std::vector<EnvFactor>& factors() const { return factors_; }

    std::size_t factor_position(const std::string& name) const {
        for (std::size_t i = 0; i < factors_.size(); ++i)
            if (factors_[i].name == name) return i;
        throw error(errc::unknown_register, "unknown register: " + name);
    }

    // Flat index layout is row-major: first factor slowest.
    std::string flat_label(std::size_t idx) const {
        std::string out;
        auto comps = components(idx);
        for (std::size_t k = 0; k < factors_.size(); ++k) {
            if (k) out += '|';
            out += factors_[k].labels[comps[k]];
        }
        return out;
    }

    std::vector<std::string> flat_labels() const {
        std::vector<std::string> out(size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = flat_label(i);
        return out;
    }

    std::size_t index_of_label(const std::string& label) const {
        const auto all = flat_labels();
        for (std::size_t i = 0; i < all.size(); ++i)
            if (all[i] == label) return i;
        throw error(errc::unknown_label, "unknown environment label: " + label);
    }

    std::vector<std::size_t> components(std::size_t idx) const {
        std::vector<std::size_t> comps(factors_.size());
        for (std::size_t k = factors_.size(); k-- > 0;) {
            const std::size_t s = factors_[k].labels.size();
            comps[k] = idx % s;
            idx /= s;
        }
        return comps;
    }

    std::size_t compose(const std::vector<std::size_t>& comps) const {
        std::size_t idx = 0;
        for (std::size_t k = 0; k < factors_.size(); ++k)
            idx = idx * factors_[k].labels.size() + comps[k];
        return idx;
    }

    EnvSpace without(std::size_t factor_pos) const {
        if (factors_.size() <= 1)
            throw error(errc::unknown_register, "cannot trace out the only register");
        EnvSpace e;
        for (std::size_t k = 0; k < factors_.size(); ++k)
            if (k != factor_pos) e.factors_.push_back(factors_[k]);
        return e;
    }

    friend bool operator==(const EnvSpace&, const EnvSpace&) = default;

   private:
    std::vector<EnvFactor> factors_;
};

inline void require_same_env(const EnvSpace& a, const EnvSpace& b) {
    if (!(a == b)) throw error(errc::env_mismatch, "environment spaces differ");
}

// --------------------------------------------------------------------------
// Classical states of knowledge

template <typename T>
struct ClassicalColumn {
    T weight{};           // > 0
    std::vector<T> dist;  // entries >= 0, sums to 1

    friend bool operator==(const ClassicalColumn&, const ClassicalColumn&) = default;
};

template <typename T>
class ClassicalSok {
    using st = scalar_traits<T>;

   public:
    ClassicalSok() = default;

    static ClassicalSok zero(EnvSpace env) {
        ClassicalSok s;
        s.env_ = std::move(env);
        return s;
    }

    // Build from raw nonnegative columns; zero columns are dropped and the
    // remaining ones normalized into weight * distribution form.
    static ClassicalSok from_columns(EnvSpace env, const std::vector<std::vector<T>>& raw) {
        ClassicalSok s;
        s.env_ = std::move(env);
        const std::size_t n = s.env_.size();
        for (const auto& col : raw) {
            if (col.size() != n) throw error(errc::dimension_mismatch, "column length != |E|");
            T sum{};
            for (const auto& v : col) {
                if (v < -st::tol()) throw error(errc::negative_scalar, "negative column entry");
                sum += v;
            }
            if (st::is_zero(sum)) continue;
            ClassicalColumn<T> c;
            c.weight = sum;
            c.dist.reserve(n);
            for (const auto& v : col) c.dist.push_back(v < T{} ? T{} : T(v / sum));
            s.cols_.push_back(std::move(c));
        }
        return s;
    }

    static ClassicalSok from_matrix(EnvSpace env, const Mat<T>& rep) {
        std::vector<std::vector<T>> cols(rep.cols(), std::vector<T>(rep.rows()));
        for (std::size_t j = 0; j < rep.cols(); ++j)
            for (std::size_t i = 0; i < rep.rows(); ++i) cols[j][i] = rep(i, j);
        return from_columns(std::move(env), cols);
    }

    const EnvSpace& env() const { return env_; }
    const std::vector<ClassicalColumn<T>>& columns() const { return cols_; }
    bool is_zero() const { return cols_.empty(); }

    // The representative matrix P (environment x memory).
    Mat<T> representative() const {
        Mat<T> p(env_.size(), cols_.size());
        for (std::size_t j = 0; j < cols_.size(); ++j)
            for (std::size_t i = 0; i < p.rows(); ++i) p(i, j) = cols_[j].weight * cols_[j].dist[i];
        return p;
    }

    friend bool operator==(const ClassicalSok&, const ClassicalSok&) = default;

   private:
    EnvSpace env_;
    std::vector<ClassicalColumn<T>> cols_;

    template <typename U>
    friend ClassicalSok<U> add(const ClassicalSok<U>&, const ClassicalSok<U>&);
    template <typename U>
    friend ClassicalSok<U> scalar_mul(const U&, const ClassicalSok<U>&);
    template <typename U>
    friend ClassicalSok<U> mul(const ClassicalSok<U>&, const ClassicalSok<U>&);
    template <typename U>
    friend ClassicalSok<U> canonicalize(const ClassicalSok<U>&);
    template <typename U>
    friend ClassicalSok<U> partial_trace(const ClassicalSok<U>&, const std::string&);
};

template <typename T>
ClassicalSok<T> add(const ClassicalSok<T>& a, const ClassicalSok<T>& b) {
    require_same_env(a.env(), b.env());
    ClassicalSok<T> r = a;
    r.cols_.insert(r.cols_.end(), b.cols_.begin(), b.cols_.end());
    return r;
}

template <typename T>
ClassicalSok<T> scalar_mul(const T& lambda, const ClassicalSok<T>& s) {
    if (lambda < T{}) throw error(errc::negative_scalar, "negative scalar on a plain SOK");
    ClassicalSok<T> r = ClassicalSok<T>::zero(s.env());
    if (scalar_traits<T>::is_zero(lambda)) return r;
    r.cols_ = s.columns();
    for (auto& c : r.cols_) c.weight = c.weight * lambda;
    return r;
}

template <typename T>
ClassicalSok<T> mul(const ClassicalSok<T>& a, const ClassicalSok<T>& b) {
    require_same_env(a.env(), b.env());
    ClassicalSok<T> r = ClassicalSok<T>::zero(a.env());
    const std::size_t n = a.env().size();
    for (const auto& ca : a.columns())
        for (const auto& cb : b.columns()) {
            T sum{};
            std::vector<T> prod(n);
            for (std::size_t e = 0; e < n; ++e) {
                prod[e] = ca.dist[e] * cb.dist[e];
                sum += prod[e];
            }
            if (scalar_traits<T>::is_zero(sum)) continue;
            ClassicalColumn<T> c;
            c.weight = ca.weight * cb.weight * sum;
            c.dist.resize(n);
            for (std::size_t e = 0; e < n; ++e) c.dist[e] = prod[e] / sum;
            r.cols_.push_back(std::move(c));
        }
    return r;
}

template <typename T>
T trace(const ClassicalSok<T>& s) {
    T t{};
    for (const auto& c : s.columns()) t += c.weight;
    return t;
}

template <typename T>
std::vector<T> eval(const ClassicalSok<T>& s) {
    std::vector<T> v(s.env().size(), T{});
    for (const auto& c : s.columns())
        for (std::size_t e = 0; e < v.size(); ++e) v[e] += c.weight * c.dist[e];
    return v;
}

// Absorb the named register into the agent's memory: every column over
// E x C splits into |C| columns over E.
template <typename T>
ClassicalSok<T> partial_trace(const ClassicalSok<T>& s, const std::string& register_name) {
    const std::size_t k = s.env().factor_position(register_name);
    const std::size_t csize = s.env().factors()[k].labels.size();
    EnvSpace reduced = s.env().without(k);
    ClassicalSok<T> r = ClassicalSok<T>::zero(reduced);
    const std::size_t nr = reduced.size();

    // flat index of the full space for (reduced index, component c)
    std::vector<std::vector<std::size_t>> full_index(csize, std::vector<std::size_t>(nr));
    for (std::size_t ri = 0; ri < nr; ++ri) {
        auto comps = reduced.components(ri);
        for (std::size_t c = 0; c < csize; ++c) {
            std::vector<std::size_t> full = comps;
            full.insert(full.begin() + static_cast<std::ptrdiff_t>(k), c);
            full_index[c][ri] = s.env().compose(full);
        }
    }

    for (const auto& col : s.columns())
        for (std::size_t c = 0; c < csize; ++c) {
            T sum{};
            std::vector<T> part(nr);
            for (std::size_t ri = 0; ri < nr; ++ri) {
                part[ri] = col.dist[full_index[c][ri]];
                sum += part[ri];
            }
            if (scalar_traits<T>::is_zero(sum)) continue;
            ClassicalColumn<T> nc;
            nc.weight = col.weight * sum;
            nc.dist.resize(nr);
            for (std::size_t ri = 0; ri < nr; ++ri) nc.dist[ri] = part[ri] / sum;
            r.cols_.push_back(std::move(nc));
        }
    return r;
}

namespace detail {

template <typename T>
bool dist_close(const std::vector<T>& a, const std::vector<T>& b) {
    if constexpr (scalar_traits<T>::exact) {
        return a == b;
    } else {
        for (std::size_t i = 0; i < a.size(); ++i)
            if (std::fabs(a[i] - b[i]) > float_eps()) return false;
        return true;
    }
}

}  // namespace detail

// Canonical form: zero columns dropped, equal distributions merged by
// summing weights, columns sorted lexicographically by distribution.
template <typename T>
ClassicalSok<T> canonicalize(const ClassicalSok<T>& s) {
    ClassicalSok<T> r = s;
    std::sort(r.cols_.begin(), r.cols_.end(),
              [](const ClassicalColumn<T>& a, const ClassicalColumn<T>& b) {
                  return std::lexicographical_compare(a.dist.begin(), a.dist.end(),
                                                      b.dist.begin(), b.dist.end());
              });
    std::vector<ClassicalColumn<T>> merged;
    for (auto& c : r.cols_) {
        if (scalar_traits<T>::is_zero(c.weight)) continue;
        if (!merged.empty() && detail::dist_close(merged.back().dist, c.dist))
            merged.back().weight += c.weight;
        else
            merged.push_back(std::move(c));
    }
    r.cols_ = std::move(merged);
    return r;
}

template <typename T>
bool canonical_equal(const ClassicalSok<T>& a, const ClassicalSok<T>& b) {
    if (!(a.env() == b.env())) return false;
    auto ca = canonicalize(a), cb = canonicalize(b);
    if (ca.columns().size() != cb.columns().size()) return false;
    for (std::size_t j = 0; j < ca.columns().size(); ++j) {
        const auto& x = ca.columns()[j];
        const auto& y = cb.columns()[j];
        if constexpr (scalar_traits<T>::exact) {
            if (!(x.weight == y.weight && x.dist == y.dist)) return false;
        } else {
            if (std::fabs(x.weight - y.weight) > float_eps()) return false;
            if (!detail::dist_close(x.dist, y.dist)) return false;
        }
    }
    return true;
}

template <typename T>
ClassicalSok<T> embed_point(const EnvSpace& env, const std::string& label) {
    const std::size_t e = env.index_of_label(label);
    std::vector<T> col(env.size(), T{});
    col[e] = T(1);
    return ClassicalSok<T>::from_columns(env, {col});
}

template <typename T>
ClassicalSok<T> embed_real(const EnvSpace& env, const T& r) {
    if (r < T{}) throw error(errc::negative_scalar, "embed_real: negative value; use the quasi form");
    if (scalar_traits<T>::is_zero(r)) return ClassicalSok<T>::zero(env);
    std::vector<T> col(env.size(), r);
    return ClassicalSok<T>::from_columns(env, {col});
}

// --------------------------------------------------------------------------
// Pure-quantum states of knowledge

template <typename T>
struct WaveFamily {
    EnvSpace env;
    std::vector<std::vector<Cx<T>>> vectors;  // one wavevector over E per memory state
};

template <typename T>
Mat<Cx<double>> to_double_gram(const Mat<Cx<T>>& g) {
    Mat<Cx<double>> r(g.rows(), g.cols());
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j)
            r(i, j) = {scalar_traits<T>::to_double(g(i, j).re),
                       scalar_traits<T>::to_double(g(i, j).im)};
    return r;
}

template <typename T>
class QuantumSok {
    using st = scalar_traits<T>;

   public:
    QuantumSok() = default;

    QuantumSok(EnvSpace env, Mat<Cx<T>> gram, bool validate = true)
        : env_(std::move(env)), gram_(std::move(gram)) {
        if (gram_.rows() != env_.size() || gram_.cols() != env_.size())
            throw error(errc::dimension_mismatch, "gram size != |E|");
        if (validate) {
            if (hermiticity_residual(gram_) > (st::exact ? 0.0 : float_eps()))
                throw error(errc::not_hermitian, "gram not Hermitian");
            if constexpr (st::exact) {
                if (!is_psd_exact(gram_))
                    throw error(errc::negative_scalar, "gram not positive semidefinite");
            } else {
                if (min_eigval_herm(to_double_gram(gram_), 1e-7) < -float_eps())
                    throw error(errc::negative_scalar, "gram not positive semidefinite");
            }
        }
    }

    static QuantumSok zero(EnvSpace env) {
        const std::size_t n = env.size();
        return QuantumSok(std::move(env), Mat<Cx<T>>(n, n), false);
    }

    const EnvSpace& env() const { return env_; }
    const Mat<Cx<T>>& gram() const { return gram_; }
    bool is_zero() const {
        for (std::size_t i = 0; i < gram_.rows(); ++i)
            for (std::size_t j = 0; j < gram_.cols(); ++j)
                if (!(st::is_zero(gram_(i, j).re) && st::is_zero(gram_(i, j).im))) return false;
        return true;
    }

    friend bool operator==(const QuantumSok&, const QuantumSok&) = default;

   private:
    EnvSpace env_;
    Mat<Cx<T>> gram_;
};

template <typename T>
QuantumSok<T> add(const QuantumSok<T>& a, const QuantumSok<T>& b) {
    require_same_env(a.env(), b.env());
    return QuantumSok<T>(a.env(), a.gram() + b.gram(), false);
}

template <typename T>
QuantumSok<T> scalar_mul(const T& lambda, const QuantumSok<T>& s) {
    if (lambda < T{}) throw error(errc::negative_scalar, "negative scalar on a plain SOK");
    return QuantumSok<T>(s.env(), scale(lambda, s.gram()), false);
}

// Hadamard product of grams; PSD by the Schur product theorem.
template <typename T>
QuantumSok<T> mul(const QuantumSok<T>& a, const QuantumSok<T>& b) {
    require_same_env(a.env(), b.env());
    Mat<Cx<T>> g(a.gram().rows(), a.gram().cols());
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) = a.gram()(i, j) * b.gram()(i, j);
    return QuantumSok<T>(a.env(), std::move(g), false);
}

template <typename T>
T trace(const QuantumSok<T>& s) {
    T t{};
    for (std::size_t i = 0; i < s.gram().rows(); ++i) t += s.gram()(i, i).re;
    return t;
}

template <typename T>
std::vector<T> eval(const QuantumSok<T>& s) {
    std::vector<T> v(s.env().size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = s.gram()(i, i).re;
    return v;
}

template <typename T>
QuantumSok<T> partial_trace(const QuantumSok<T>& s, const std::string& register_name) {
    const std::size_t k = s.env().factor_position(register_name);
    const std::size_t csize = s.env().factors()[k].labels.size();
    EnvSpace reduced = s.env().without(k);
    const std::size_t nr = reduced.size();
    Mat<Cx<T>> g(nr, nr);
    for (std::size_t ri = 0; ri < nr; ++ri) {
        auto ci = reduced.components(ri);
        for (std::size_t rj = 0; rj < nr; ++rj) {
            auto cj = reduced.components(rj);
            Cx<T> acc{};
            for (std::size_t c = 0; c < csize; ++c) {
                auto fi = ci;
                fi.insert(fi.begin() + static_cast<std::ptrdiff_t>(k), c);
                auto fj = cj;
                fj.insert(fj.begin() + static_cast<std::ptrdiff_t>(k), c);
                acc += s.gram()(s.env().compose(fi), s.env().compose(fj));
            }
            g(ri, rj) = acc;
        }
    }
    return QuantumSok<T>(reduced, std::move(g), false);
}

template <typename T>
QuantumSok<T> from_waves(const WaveFamily<T>& w) {
    const std::size_t n = w.env.size();
    Mat<Cx<T>> g(n, n);
    for (const auto& psi : w.vectors) {
        if (psi.size() != n) throw error(errc::dimension_mismatch, "wavevector length != |E|");
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) g(i, j) += psi[i] * conj(psi[j]);
    }
    return QuantumSok<T>(w.env, std::move(g), false);
}

template <typename T>
QuantumSok<T> embed_point_q(const EnvSpace& env, const std::string& label) {
    const std::size_t e = env.index_of_label(label);
    Mat<Cx<T>> g(env.size(), env.size());
    g(e, e) = Cx<T>(T(1));
    return QuantumSok<T>(env, std::move(g), false);
}

template <typename T>
QuantumSok<T> embed_real_q(const EnvSpace& env, const T& r) {
    if (r < T{}) throw error(errc::negative_scalar, "embed_real: negative value; use the quasi form");
    Mat<Cx<T>> g(env.size(), env.size());
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) = Cx<T>(r);
    return QuantumSok<T>(env, std::move(g), false);
}

template <typename T>
bool canonical_equal(const QuantumSok<T>& a, const QuantumSok<T>& b) {
    if (!(a.env() == b.env())) return false;
    if constexpr (scalar_traits<T>::exact) {
        return a.gram() == b.gram();
    } else {
        for (std::size_t i = 0; i < a.gram().rows(); ++i)
            for (std::size_t j = 0; j < a.gram().cols(); ++j) {
                Cx<double> d = a.gram()(i, j) - b.gram()(i, j);
                if (std::fabs(d.re) > float_eps() || std::fabs(d.im) > float_eps()) return false;
            }
        return true;
    }
}

// --------------------------------------------------------------------------
// Quasiknowledge: formal differences pos - neg of same-kind SOKs

template <typename S>
struct Quasi {
    S pos;
    S neg;
};

template <typename T>
using ClassicalQuasi = Quasi<ClassicalSok<T>>;
template <typename T>
using QuantumQuasi = Quasi<QuantumSok<T>>;

template <typename T>
ClassicalQuasi<T> make_quasi(ClassicalSok<T> pos, ClassicalSok<T> neg) {
    require_same_env(pos.env(), neg.env());
    return {canonicalize(pos), canonicalize(neg)};
}

// Quantum formal differences reduce to the positive/negative eigenspace
// split of gram(pos) - gram(neg) in float mode. Exact eigenvectors do not
// exist in rational arithmetic, so rational pairs are kept as given (order
// and equivalence only ever use the difference, which is split-invariant).
template <typename T>
QuantumQuasi<T> make_quasi(QuantumSok<T> pos, QuantumSok<T> neg) {
    require_same_env(pos.env(), neg.env());
    if constexpr (!scalar_traits<T>::exact) {
        Mat<Cx<double>> diff = pos.gram() - neg.gram();
        Mat<Cx<double>> p = clamp_psd(diff);
        Mat<Cx<double>> negdiff(diff.rows(), diff.cols());
        for (std::size_t i = 0; i < diff.rows(); ++i)
            for (std::size_t j = 0; j < diff.cols(); ++j) negdiff(i, j) = -diff(i, j);
        Mat<Cx<double>> q = clamp_psd(negdiff);
        return {QuantumSok<T>(pos.env(), std::move(p), false),
                QuantumSok<T>(pos.env(), std::move(q), false)};
    } else {
        return {std::move(pos), std::move(neg)};
    }
}

template <typename S>
Quasi<S> as_quasi(S s) {
    S z = S::zero(s.env());
    return {std::move(s), std::move(z)};
}

template <typename S>
Quasi<S> add(const Quasi<S>& a, const Quasi<S>& b) {
    return make_quasi(add(a.pos, b.pos), add(a.neg, b.neg));
}

template <typename S>
Quasi<S> sub(const Quasi<S>& a, const Quasi<S>& b) {
    return make_quasi(add(a.pos, b.neg), add(a.neg, b.pos));
}

template <typename S>
Quasi<S> negate(const Quasi<S>& a) {
    return {a.neg, a.pos};
}

// (A - B)(C - D) = (AC + BD) - (AD + BC)
template <typename S>
Quasi<S> mul(const Quasi<S>& a, const Quasi<S>& b) {
    return make_quasi(add(mul(a.pos, b.pos), mul(a.neg, b.neg)),
                      add(mul(a.pos, b.neg), mul(a.neg, b.pos)));
}

template <typename S, typename T>
Quasi<S> scalar_mul_quasi(const T& lambda, const Quasi<S>& a) {
    if (lambda < T{}) return make_quasi(scalar_mul(T(-lambda), a.neg), scalar_mul(T(-lambda), a.pos));
    return make_quasi(scalar_mul(lambda, a.pos), scalar_mul(lambda, a.neg));
}

template <typename S>
auto trace(const Quasi<S>& a) {
    return trace(a.pos) - trace(a.neg);
}

template <typename S>
Quasi<S> partial_trace(const Quasi<S>& a, const std::string& register_name) {
    return make_quasi(partial_trace(a.pos, register_name), partial_trace(a.neg, register_name));
}

template <typename T>
ClassicalQuasi<T> embed_real_quasi(const EnvSpace& env, const T& r) {
    if (r < T{}) return make_quasi(ClassicalSok<T>::zero(env), embed_real<T>(env, T(-r)));
    return make_quasi(embed_real<T>(env, r), ClassicalSok<T>::zero(env));
}

}  // namespace qk
