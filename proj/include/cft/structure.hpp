#pragma once

// Condition checks for an elliptic curve over k = Q_p(mu_{p^M}) and the
// structure formulas built on them. Every formula refuses to evaluate
// (HypothesisError) when its hypotheses are not met.

#include <cft/abgroup.hpp>
#include <cft/curves.hpp>
#include <cft/padic.hpp>

#include <optional>
#include <string>
#include <vector>

namespace cft {

struct ConditionsReport {
    long p = 3;
    int M = 1;
    std::string id;
    bool good = false;
    bool ordinary = false;
    std::optional<long> ap;
    bool rat = false;          // E[p] inside E(k)
    bool rat_checked = false;  // the torsion search ran (good reduction only)
    int N = 0;                 // largest n <= M with E[p^n] inside E(k)
    bool ram = false;          // k(mu_{p^{N+1}})/k nontrivial, i.e. N = M
    std::optional<AbGroup> reduced_group;  // reduction over F_p
    std::vector<long> root_valuations;     // of the K-rational roots of psi_p
    double seconds = 0.0;
};

/// Evaluates good/ordinary/rat/N/ram for E over k = Q_p(mu_{p^M}).
/// assume_minimal is passed on to good_ordinary_at.
ConditionsReport check_conditions(const WeierstrassCurve& E, long p, int M, std::string id = {},
                                  bool assume_minimal = false);
/// Same, reusing an already constructed k (which must be Q_p(mu_{p^M})).
ConditionsReport check_conditions(const WeierstrassCurve& E, const FieldPtr& k, std::string id = {},
                                  bool assume_minimal = false);

/// True when (Rat), (Ord) and (Ram) hold, i.e. the structure formulas apply.
bool hypotheses_hold(const ConditionsReport& r);

/// (Z/p^N)^g + reduced, the pure formula.
AbGroup structure_Kfin(long p, int N, int g, const AbGroup& reduced);
/// The group V(X)_fin = K(k; G_m, E)_fin for a report satisfying the hypotheses.
AbGroup structure_Kfin(const ConditionsReport& r);

/// (Z/p^min(n,N))^g + reduced / p^n; for n <= N the order is checked to be p^(2gn).
AbGroup structure_mod(long p, int N, int g, const AbGroup& reduced, int n);
AbGroup structure_mod(const ConditionsReport& r, int n);

/// reduced / m for m prime to p; only good reduction is required.
AbGroup structure_prime_to_p(const ConditionsReport& r, long m);

/// (Z/p^n)^(g1 g2) for the product of two curves with Jacobians of
/// dimensions g1, g2, both ordinary with all p^n-torsion rational.
AbGroup albanese_mod(const ConditionsReport& J1, int g1, const ConditionsReport& J2, int g2, int n);

struct KummerShape {
    int n = 1;
    int g = 1;
    int dim_Ubar = 0;        // rank of the unit image in K^x/p
    int dim_kerj = 0;        // rank of Ker(K^x/p -> (K^ur)^x/p)
    int mattuck_total = 0;   // g ([K:Q_p] + 2)
    int formal_d = 0;        // #E^(m_K)/p = p^d
    int reduced_p_dim = 0;   // dim of the p-torsion of the reduction
    AbGroup ubar_group;      // image of U_K in K^x/p^n
    AbGroup kerj_group;      // Ker(j) at level p^n
};

/// Dimension data of the Kummer image of E(K)/p^n, with the cross-checks
/// d + dim E~(F)[p] = g([K:Q_p] + 2) and dim Ubar + dim Ker(j) = g([K:Q_p] + 2).
/// IntegrityError on a mismatch.
KummerShape kummer_image_shape(const WeierstrassCurve& E, const FieldPtr& K, int n, const ConditionsReport& r);

}  // namespace cft
