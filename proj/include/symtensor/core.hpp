#ifndef SYMTENSOR_CORE_HPP
#define SYMTENSOR_CORE_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace symtensor {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Raised on violated shape, order or argument preconditions.
class Error : public std::invalid_argument {
 public:
  explicit Error(const std::string& what) : std::invalid_argument(what) {}
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(what);
}

}  // namespace detail
}  // namespace symtensor

#endif  // SYMTENSOR_CORE_HPP
