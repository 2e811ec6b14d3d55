#pragma once

// Random policy and attribute-set generators for property tests.

#include <string>
#include <vector>

#include "dw/common/random.hpp"
#include "dw/policy/policy.hpp"

namespace dw::testgen {

inline std::string attr_name(std::size_t i)
{
    return std::string(1, static_cast<char>('A' + i % 26)) + (i >= 26 ? std::to_string(i / 26) : "");
}

inline policy::PolicyExpr random_policy(RandomSource& rng, std::size_t universe, std::size_t max_depth)
{
    if (max_depth == 0 || rng.uniform(3) == 0) return policy::PolicyExpr::attr(attr_name(rng.uniform(universe)));
    auto l = random_policy(rng, universe, max_depth - 1);
    auto r = random_policy(rng, universe, max_depth - 1);
    return rng.uniform(2) ? policy::PolicyExpr::all_of(l, r) : policy::PolicyExpr::any_of(l, r);
}

inline policy::AttributeSet random_attrs(RandomSource& rng, std::size_t universe)
{
    policy::AttributeSet s;
    for (std::size_t i = 0; i < universe; ++i) {
        if (rng.uniform(2)) s.insert(attr_name(i));
    }
    return s;
}

} // namespace dw::testgen
