#pragma once

#include <vector>

namespace quare::assignment {

// Exact maximum-sum assignment on a square score matrix via the
// potential-based augmenting-path method (O(n^3)). Returns column pi(i)
// for each row i.
std::vector<int> max_assignment(const std::vector<std::vector<double>>& scores);

double assignment_value(const std::vector<std::vector<double>>& scores,
                        const std::vector<int>& assignment);

} // namespace quare::assignment
