#include "kvn/operators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "kvn/fft.hpp"

namespace kvn {

namespace {

std::atomic<std::uint64_t> g_fn_counter{1};

void apply_factor_in_place(const Factor& f, WaveField& v) {
    const Grid& g = *v.grid;
    switch (f.kind) {
        case Factor::Kind::lambda:
            spectral::lambda_axis(v.data(), g, f.axis);
            break;
        case Factor::Kind::axis_coord: {
            const std::size_t n = g.axis(f.axis).n;
            const std::size_t s = g.stride(f.axis);
            const std::size_t outer = v.size() / (n * s);
            const auto& xs = g.coords(f.axis);
            parallel_for(outer, [&](std::size_t b, std::size_t e) {
                for (std::size_t o = b; o < e; ++o) {
                    cplx* base = v.data() + o * n * s;
                    for (std::size_t j = 0; j < n; ++j) {
                        const double x = xs[j];
                        cplx* row = base + j * s;
                        for (std::size_t c = 0; c < s; ++c) row[c] *= x;
                    }
                }
            });
            break;
        }
        case Factor::Kind::scalar_fn: {
            const std::size_t na = g.n_axes();
            parallel_for(v.size(), [&](std::size_t b, std::size_t e) {
                std::vector<std::size_t> idx(na);
                std::vector<double> coords(na);
                for (std::size_t i = b; i < e; ++i) {
                    g.unravel(i, idx.data());
                    for (std::size_t ax = 0; ax < na; ++ax) coords[ax] = g.coords(ax)[idx[ax]];
                    v.a[i] *= f.fn(coords.data());
                }
            });
            break;
        }
        case Factor::Kind::sampled_field: {
            const cplx* t = f.table->data();
            parallel_for(v.size(), [&](std::size_t b, std::size_t e) {
                for (std::size_t i = b; i < e; ++i) v.a[i] *= t[i];
            });
            break;
        }
    }
}

// View of a term during suffix-shared evaluation: `depth` factors already
// applied (counting from the right end).
struct TermView {
    const Term* term;
    std::size_t remaining;  // factors not applied yet
};

void eval_terms(std::vector<TermView>& views, const WaveField& current, WaveField& out, cplx prefactor) {
    // Emit finished terms.
    std::vector<TermView> pending;
    pending.reserve(views.size());
    for (const TermView& tv : views) {
        if (tv.remaining == 0)
            axpy(out, prefactor * tv.term->coeff, current);
        else
            pending.push_back(tv);
    }
    // Group by the next (rightmost unapplied) factor and recurse per group.
    while (!pending.empty()) {
        const Factor& key = pending.front().term->factors[pending.front().remaining - 1];
        std::vector<TermView> group;
        std::vector<TermView> rest;
        for (const TermView& tv : pending) {
            if (tv.term->factors[tv.remaining - 1].same_as(key))
                group.push_back({tv.term, tv.remaining - 1});
            else
                rest.push_back(tv);
        }
        WaveField next = current;
        apply_factor_in_place(key, next);
        eval_terms(group, next, out, prefactor);
        pending.swap(rest);
    }
}

}  // namespace

void LinearOperator::check_grid(const WaveField& psi) const {
    if (grid && !grid->same_shape(*psi.grid))
        throw ConfigError("operator '" + label + "': grid mismatch");
}

void LinearOperator::apply_accumulate(const WaveField& psi, WaveField& out, cplx prefactor) const {
    check_grid(psi);
    std::vector<TermView> views;
    views.reserve(terms.size());
    for (const Term& t : terms) views.push_back({&t, t.factors.size()});
    eval_terms(views, psi, out, prefactor);
}

WaveField LinearOperator::apply(const WaveField& psi) const {
    WaveField out(psi.grid, psi.time);
    apply_accumulate(psi, out);
    return out;
}

LinearOperator zero_op(GridPtr g) {
    LinearOperator op;
    op.label = "0";
    op.grid = std::move(g);
    op.hermitian_hint = true;
    return op;
}

LinearOperator identity_op(GridPtr g) {
    LinearOperator op;
    op.label = "1";
    op.grid = std::move(g);
    op.hermitian_hint = true;
    op.terms.push_back(Term{});
    return op;
}

LinearOperator coord_op(GridPtr g, std::size_t axis) {
    LinearOperator op;
    op.label = g->axis(axis).name;
    op.hermitian_hint = true;
    op.grid = std::move(g);
    Term t;
    t.factors.push_back(Factor{Factor::Kind::axis_coord, axis, nullptr, 0});
    op.terms.push_back(std::move(t));
    return op;
}

LinearOperator coord_op(GridPtr g, const std::string& axis_name) {
    return coord_op(g, g->axis_index(axis_name));
}

LinearOperator lambda_op(GridPtr g, std::size_t axis) {
    LinearOperator op;
    op.label = "lambda_" + g->axis(axis).name;
    op.hermitian_hint = true;
    op.grid = std::move(g);
    Term t;
    t.factors.push_back(Factor{Factor::Kind::lambda, axis, nullptr, 0});
    op.terms.push_back(std::move(t));
    return op;
}

LinearOperator lambda_op(GridPtr g, const std::string& axis_name) {
    return lambda_op(g, g->axis_index(axis_name));
}

LinearOperator scalar_field_op(GridPtr g, std::function<cplx(const double*)> fn,
                               const std::string& label, bool hermitian) {
    LinearOperator op;
    op.label = label;
    op.hermitian_hint = hermitian;
    op.grid = std::move(g);
    Term t;
    Factor f;
    f.kind = Factor::Kind::scalar_fn;
    f.fn = std::move(fn);
    f.fn_id = g_fn_counter.fetch_add(1);
    t.factors.push_back(std::move(f));
    op.terms.push_back(std::move(t));
    return op;
}

LinearOperator sampled_field_op(GridPtr g, const std::function<cplx(const double*)>& fn,
                                const std::string& label, bool hermitian) {
    auto table = std::make_shared<std::vector<cplx>>(g->total_points());
    const Grid& grid = *g;
    const std::size_t na = grid.n_axes();
    parallel_for(table->size(), [&](std::size_t b, std::size_t e) {
        std::vector<std::size_t> idx(na);
        std::vector<double> coords(na);
        for (std::size_t i = b; i < e; ++i) {
            grid.unravel(i, idx.data());
            for (std::size_t ax = 0; ax < na; ++ax) coords[ax] = grid.coords(ax)[idx[ax]];
            (*table)[i] = fn(coords.data());
        }
    });
    LinearOperator op;
    op.label = label;
    op.hermitian_hint = hermitian;
    op.grid = std::move(g);
    Term t;
    Factor f;
    f.kind = Factor::Kind::sampled_field;
    f.table = std::move(table);
    f.fn_id = g_fn_counter.fetch_add(1);
    t.factors.push_back(std::move(f));
    op.terms.push_back(std::move(t));
    return op;
}

LinearOperator operator+(const LinearOperator& a, const LinearOperator& b) {
    LinearOperator op;
    op.label = "(" + a.label + " + " + b.label + ")";
    op.grid = a.grid ? a.grid : b.grid;
    op.terms = a.terms;
    op.terms.insert(op.terms.end(), b.terms.begin(), b.terms.end());
    return op;
}

LinearOperator operator-(const LinearOperator& a, const LinearOperator& b) {
    return a + (cplx{-1.0, 0.0} * b);
}

namespace {

// Pointwise factors commute; sorting maximal multiplicative runs into a
// canonical order makes algebraically equal products evaluate identically
// and exposes more shared suffixes.
void canonicalize(Term& t) {
    auto mult = [](const Factor& f) { return f.kind != Factor::Kind::lambda; };
    auto key_less = [](const Factor& a, const Factor& b) {
        if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
        if (a.axis != b.axis) return a.axis < b.axis;
        return a.fn_id < b.fn_id;
    };
    auto it = t.factors.begin();
    while (it != t.factors.end()) {
        if (!mult(*it)) {
            ++it;
            continue;
        }
        auto run_end = it;
        while (run_end != t.factors.end() && mult(*run_end)) ++run_end;
        std::stable_sort(it, run_end, key_less);
        it = run_end;
    }
}

}  // namespace

LinearOperator operator*(const LinearOperator& a, const LinearOperator& b) {
    LinearOperator op;
    op.label = a.label + " " + b.label;
    op.grid = a.grid ? a.grid : b.grid;
    op.terms.reserve(a.terms.size() * b.terms.size());
    for (const Term& ta : a.terms) {
        for (const Term& tb : b.terms) {
            Term t;
            t.coeff = ta.coeff * tb.coeff;
            t.factors = ta.factors;
            t.factors.insert(t.factors.end(), tb.factors.begin(), tb.factors.end());
            canonicalize(t);
            op.terms.push_back(std::move(t));
        }
    }
    return op;
}

LinearOperator operator*(cplx c, const LinearOperator& a) {
    LinearOperator op = a;
    for (Term& t : op.terms) t.coeff *= c;
    return op;
}

LinearOperator commutator(const LinearOperator& a, const LinearOperator& b) {
    LinearOperator op = (a * b) - (b * a);
    op.label = "[" + a.label + ", " + b.label + "]";
    return op;
}

WaveField apply_multiplicative(const std::string& axis_name, const WaveField& psi) {
    return coord_op(psi.grid, axis_name).apply(psi);
}

WaveField apply_shift_generator(const std::string& axis_name, const WaveField& psi) {
    return lambda_op(psi.grid, axis_name).apply(psi);
}

WaveField commutator_apply(const LinearOperator& a, const LinearOperator& b, const WaveField& psi) {
    return commutator(a, b).apply(psi);
}

std::vector<IdentityResult> identity_residuals(const OperatorIdentity& identity,
                                               const std::vector<WaveField>& states) {
    if (states.empty()) throw ConfigError("identity_residuals: empty test-state list");
    std::vector<IdentityResult> out;
    out.reserve(states.size());
    for (std::size_t s = 0; s < states.size(); ++s) {
        const WaveField& psi = states[s];
        WaveField r(psi.grid, psi.time);
        identity.lhs.apply_accumulate(psi, r);
        identity.rhs.apply_accumulate(psi, r, cplx{-1.0, 0.0});
        const double res = norm(r) / norm(psi);
        out.push_back({identity.id, static_cast<int>(s), res, identity.tolerance,
                       res < identity.tolerance});
    }
    return out;
}

double identity_residual(const OperatorIdentity& identity, const std::vector<WaveField>& states) {
    double m = 0.0;
    for (const auto& r : identity_residuals(identity, states)) m = std::max(m, r.residual);
    return m;
}

double linearity_defect(const LinearOperator& op, const WaveField& psi1, const WaveField& psi2) {
    const cplx a{0.7, -0.4};
    const cplx b{-0.3, 1.1};
    WaveField combo = psi1;
    scale(combo, a);
    axpy(combo, b, psi2);
    WaveField lhs = op.apply(combo);
    WaveField rhs(psi1.grid, psi1.time);
    op.apply_accumulate(psi1, rhs, a);
    op.apply_accumulate(psi2, rhs, b);
    const double scale_floor = std::max(norm(rhs), norm(combo));
    axpy(lhs, cplx{-1.0, 0.0}, rhs);
    return norm(lhs) / std::max(1e-300, scale_floor);
}

double hermiticity_defect(const LinearOperator& op, const WaveField& phi, const WaveField& psi) {
    const cplx lhs = inner_product(phi, op.apply(psi));
    const cplx rhs = inner_product(op.apply(phi), psi);
    return std::abs(lhs - rhs);
}

}  // namespace kvn
