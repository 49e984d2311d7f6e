#ifndef SYMTENSOR_SYMTENSOR_HPP
#define SYMTENSOR_SYMTENSOR_HPP

#include "symtensor/core.hpp"
#include "symtensor/tensor.hpp"
#include "symtensor/model.hpp"
#include "symtensor/numerics.hpp"
#include "symtensor/polynomial.hpp"
#include "symtensor/solver_common.hpp"
#include "symtensor/als.hpp"
#include "symtensor/pcls.hpp"

#endif  // SYMTENSOR_SYMTENSOR_HPP
