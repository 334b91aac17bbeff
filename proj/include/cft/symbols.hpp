#pragma once

// K^x / (K^x)^p as an explicit F_p-vector space, its subspaces coming from
// units, and the degree-p Hilbert pairing on cyclotomic fields.

#include <cft/errors.hpp>
#include <cft/padic.hpp>

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cft {

/// Vectors over F_p with entries in [0, p).
using FpVector = std::vector<long>;

/// Reduced row echelon form of the span of rows (zero rows dropped).
std::vector<FpVector> fp_echelon(std::vector<FpVector> rows, long p);
std::size_t fp_rank(const std::vector<FpVector>& rows, long p);
/// Basis of {x : r . x = 0 for all rows r} for vectors of length ncols.
std::vector<FpVector> fp_nullspace(const std::vector<FpVector>& rows, std::size_t ncols, long p);

/// Ordered basis of K^x/p: [pi; zeta_{p^s} when s >= 1; principal units].
class UnitsModP {
public:
    /// Filtration echelonization of U^1 modulo p-th powers. Cached per field.
    static std::shared_ptr<const UnitsModP> of(const FieldPtr& K);

    const FieldPtr& field() const { return K_; }
    long p() const { return K_->p(); }
    std::size_t dimension() const { return basis_.size(); }
    const std::vector<KElem>& basis() const { return basis_; }
    const std::vector<std::string>& labels() const { return labels_; }
    /// Largest s with mu_{p^s} in K.
    int mu_level() const { return s_; }
    /// Position of zeta_{p^s} in the basis when s >= 1.
    std::optional<std::size_t> zeta_index() const
    {
        return s_ >= 1 ? std::optional<std::size_t>(1) : std::nullopt;
    }
    const KElem& zeta() const;

    /// Exponents c with a = prod basis_i^{c_i} times a p-th power. With
    /// certify, the quotient is checked by is_pth_power (PrecisionError when
    /// the check fails).
    FpVector coordinates(const KElem& a, bool certify = true) const;

    /// Level i of the unit filtration U^i at which U^i lies in (U^1)^p from
    /// i + 1 on: the largest i with i (p - 1) <= p e.
    long top_level() const { return top_; }

    explicit UnitsModP(FieldPtr K);

private:
    struct Step {
        long level;
        FiniteField::Elem theta;
    };
    // coordinates of a principal unit on the filtration basis
    FpVector filtration_coordinates(KElem u) const;

    FieldPtr K_;
    int s_ = 0;
    KElem zeta_;
    long top_ = 0;
    FiniteField::Elem p_over_pi_e_ = 0;     // residue of p / pi^e
    std::vector<Step> steps_;               // filtration basis 1 + [theta] pi^level
    std::vector<FiniteField::Elem> star_;   // cokernel representatives at level p e0
    std::vector<KElem> basis_;
    std::vector<std::string> labels_;
    // maps filtration coordinates of a principal unit to coordinates on the unit basis
    std::vector<FpVector> inverse_transition_;
};

/// Subspace of K^x/p spanned by coordinate vectors, kept echelonized.
struct SubspaceModP {
    std::shared_ptr<const UnitsModP> parent;
    std::vector<FpVector> basis;

    static SubspaceModP span(std::shared_ptr<const UnitsModP> parent, std::vector<FpVector> vectors);
    std::size_t dimension() const { return basis.size(); }
    bool contains(const FpVector& v) const;
    bool operator==(const SubspaceModP& o) const { return parent == o.parent && basis == o.basis; }
};

/// Image of the units U_K: all basis directions except pi.
SubspaceModP subgroup_Ubar(const FieldPtr& K);
/// Image of U_K^{p e0}; needs (p - 1) | e (HypothesisError otherwise).
SubspaceModP subgroup_V(const FieldPtr& K);

/// The pairing K^x/p x K^x/p -> Z/p on Q_p(mu_{p^M}).
///
/// The Gram matrix on the UnitsModP basis is the unique (up to scalar)
/// alternating form killing the Steinberg relations (a, 1 - a); the scalar
/// is fixed by (zeta_{p^M}, b) = Tr(log b) / p^M mod p for principal units b,
/// which is also checked against every unit basis vector.
class HilbertPairing {
public:
    /// Built once per field; concurrent first calls share one construction.
    /// HypothesisError for non-cyclotomic fields.
    static std::shared_ptr<const HilbertPairing> of(const FieldPtr& K);

    const std::shared_ptr<const UnitsModP>& units() const { return units_; }
    const std::vector<FpVector>& gram() const { return gram_; }
    long pair(const FpVector& a, const FpVector& b) const;
    long symbol(const KElem& a, const KElem& b) const;
    /// Number of Steinberg relations used to pin the form.
    std::size_t relations_used() const { return relations_; }

    HilbertPairing(FieldPtr K, unsigned seed);

private:
    std::shared_ptr<const UnitsModP> units_;
    std::vector<FpVector> gram_;
    std::size_t relations_ = 0;
};

/// (a, b) in Z/p; a, b nonzero.
long hilbert_symbol(const KElem& a, const KElem& b);
/// {b : (s, b) = 0 for all s in S}.
SubspaceModP annihilator(const SubspaceModP& S);

/// Principal-unit Artin-Hasse value Tr(log b) / p^M mod p on Q_p(mu_{p^M}).
long artin_hasse_zeta_value(const KElem& b);

}  // namespace cft
