#ifndef GLMDOPT_GLMDOPT_HPP
#define GLMDOPT_GLMDOPT_HPP

#include "glmdopt/certify.hpp"
#include "glmdopt/design.hpp"
#include "glmdopt/errors.hpp"
#include "glmdopt/ew.hpp"
#include "glmdopt/exchange.hpp"
#include "glmdopt/glm_weights.hpp"
#include "glmdopt/lift_one.hpp"
#include "glmdopt/types.hpp"

#endif  // GLMDOPT_GLMDOPT_HPP
