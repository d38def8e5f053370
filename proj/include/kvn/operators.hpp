#pragma once

#include <string>
#include <vector>

#include "kvn/field.hpp"

namespace kvn {

/// One multiplicative or derivative factor of an operator term.
struct Factor {
    enum class Kind { axis_coord, scalar_fn, sampled_field, lambda };
    Kind kind = Kind::axis_coord;
    std::size_t axis = 0;                        // axis_coord / lambda
    std::function<cplx(const double*)> fn;       // scalar_fn: coords -> value
    std::shared_ptr<const std::vector<cplx>> table;  // sampled_field
    std::uint64_t fn_id = 0;                     // identity key for grouping

    bool same_as(const Factor& o) const {
        return kind == o.kind && axis == o.axis && fn_id == o.fn_id;
    }
};

/// coeff * F1 F2 ... Fk, factors applied right to left.
struct Term {
    cplx coeff{1.0, 0.0};
    std::vector<Factor> factors;
};

/// Finite sum of products of coordinate multiplications, sampled scalar
/// fields, and spectral shift generators. Closed under sum, product and
/// commutator, which keeps nested bracket evaluation a flat term list.
class LinearOperator {
public:
    std::string label;
    bool hermitian_hint = false;
    GridPtr grid;
    std::vector<Term> terms;

    WaveField apply(const WaveField& psi) const;
    /// out += prefactor * (this psi). Terms sharing a rightmost factor chain
    /// reuse the shared intermediate once.
    void apply_accumulate(const WaveField& psi, WaveField& out, cplx prefactor = {1.0, 0.0}) const;

    void check_grid(const WaveField& psi) const;
};

LinearOperator zero_op(GridPtr g);
LinearOperator identity_op(GridPtr g);
/// Multiplication by the named axis coordinate (X, V, or P depending on axis).
LinearOperator coord_op(GridPtr g, const std::string& axis_name);
LinearOperator coord_op(GridPtr g, std::size_t axis);
/// lambda along an axis: -i * d/dx, realized spectrally (Nyquist zeroed).
LinearOperator lambda_op(GridPtr g, const std::string& axis_name);
LinearOperator lambda_op(GridPtr g, std::size_t axis);
/// Multiplication by a scalar function of the coordinates (evaluated
/// pointwise at apply time).
LinearOperator scalar_field_op(GridPtr g, std::function<cplx(const double*)> fn,
                               const std::string& label, bool hermitian = true);
/// Same contract, but the function is sampled onto the grid once at build
/// time; applying multiplies by the stored table (one grid-sized allocation).
LinearOperator sampled_field_op(GridPtr g, const std::function<cplx(const double*)>& fn,
                                const std::string& label, bool hermitian = true);

LinearOperator operator+(const LinearOperator& a, const LinearOperator& b);
LinearOperator operator-(const LinearOperator& a, const LinearOperator& b);
LinearOperator operator*(const LinearOperator& a, const LinearOperator& b);
LinearOperator operator*(cplx c, const LinearOperator& a);
LinearOperator commutator(const LinearOperator& a, const LinearOperator& b);

/// Spec ops: multiplication / shift-generator application by axis name.
WaveField apply_multiplicative(const std::string& axis_name, const WaveField& psi);
WaveField apply_shift_generator(const std::string& axis_name, const WaveField& psi);
WaveField commutator_apply(const LinearOperator& a, const LinearOperator& b, const WaveField& psi);

/// lhs == rhs asserted in weak form on test states.
struct OperatorIdentity {
    std::string id;
    LinearOperator lhs;
    LinearOperator rhs;
    double tolerance = 1e-8;
};

struct IdentityResult {
    std::string id;
    int state_index = 0;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Max over states of ||(lhs - rhs) psi|| / ||psi||, with per-state rows.
std::vector<IdentityResult> identity_residuals(const OperatorIdentity& identity,
                                               const std::vector<WaveField>& states);
double identity_residual(const OperatorIdentity& identity, const std::vector<WaveField>& states);

/// max over random pairs of || A(a psi1 + b psi2) - a A psi1 - b A psi2 || (relative).
double linearity_defect(const LinearOperator& op, const WaveField& psi1, const WaveField& psi2);
/// | <phi, A psi> - <A phi, psi> | for the weak hermiticity check.
double hermiticity_defect(const LinearOperator& op, const WaveField& phi, const WaveField& psi);

}  // namespace kvn
