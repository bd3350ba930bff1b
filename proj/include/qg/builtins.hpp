#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qg/graph.hpp"

namespace qg {

/// Example graphs used throughout the tests and the verification suite.
///
/// Accepted names: "figure8", "dumbbell", "chain1221", "chain321", and
/// "chain:p1,p2,..." for a general pumpkin chain with p_k parallel edges
/// between consecutive vertices.  Default lengths are (pi, e) for the
/// figure-8, (pi, e, 1) for the dumbbell and (pi, e, 1, sqrt2, sqrt3, sqrt5)
/// for the chains; longer chains extend the list with square roots of
/// successive primes.
MetricGraph builtin(const std::string& name,
                    const std::optional<std::vector<double>>& lengths = std::nullopt);

/// Pumpkin chain [p1,...,pn]: n+1 vertices, p_k parallel edges between
/// v_{k-1} and v_k.  Edges are numbered pumpkin by pumpkin, left to right.
MetricGraph pumpkin_chain(const std::vector<int>& pumpkins,
                          const std::optional<std::vector<double>>& lengths = std::nullopt);

bool has_closed_form(const std::string& name);

/// Literal closed forms of the rescaled secular function for the figure-8
/// (x1, x2 on the loops) and the dumbbell (x1, x3 on the loops, x2 on the
/// bridge).  Used as independent oracles against the determinant route.
double closed_form_FR(const std::string& name,
                      const std::vector<double>& x,
                      const std::vector<double>& alpha);

std::vector<std::string> builtin_names();

} // namespace qg
