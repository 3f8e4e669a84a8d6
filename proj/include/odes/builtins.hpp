#ifndef ODES_BUILTINS_HPP
#define ODES_BUILTINS_HPP

#include <string>
#include <vector>

#include "odes/deriv.hpp"

namespace odes {

// Registry of ODEs with exact derivative tables, keyed by name; parameters
// after a colon ("linear:0.7", "separable:sinx"). See builtin_ode_names().
OdeInstance builtin_ode(const std::string& id);
std::vector<std::string> builtin_ode_names();

}  // namespace odes

#endif
