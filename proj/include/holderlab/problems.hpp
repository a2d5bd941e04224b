#pragma once

// Worked problems: the Riesz and heat examples, the bounded-mixed-derivative
// counterexample, boundary traces with their oracles, and half-space solves.

#include "boundary.hpp"
#include "examples.hpp"
#include "halfspace.hpp"
