#pragma once

#include "nilwalk/lie_algebra.hpp"

#include <nlohmann/json_fwd.hpp>
#include <string>

namespace nilwalk {

// Heisenberg: dim 3, [e1,e2] = e3.
LieAlgebra heisenberg();

// Step-3 filiform: dim 4, [e1,e2] = e3, [e1,e3] = e4. Basis order (A,T,e3,e4)
// with A = e1 and T = e2.
LieAlgebra filiform3();

// Strictly upper triangular n x n matrices, basis E_{ij} (i<j) in
// lexicographic order of (i,j); [E_ij,E_kl] = 1_{j=k} E_il - 1_{i=l} E_kj.
LieAlgebra unitriangular(int n);

// Free nilpotent Lie algebra on `rank` generators truncated at `step`, over a
// Hall basis ordered length-lexicographically with left-normed tie-breaking
// (elements of equal degree compare by left factor first, then right).
// Dimension limited to 64.
LieAlgebra build_free_nilpotent(int rank, int step);

// Names: "heisenberg", "filiform3", "unitriangular(n)", "free(r,s)".
LieAlgebra build_preset(const std::string& name);

// {"dim": n, "step": s, "basis": [...], "brackets": [[i,j,[[k,"p/q"],...]],...]}
LieAlgebra algebra_from_json(const nlohmann::json& j);
nlohmann::json algebra_to_json(const LieAlgebra& alg);

}  // namespace nilwalk
