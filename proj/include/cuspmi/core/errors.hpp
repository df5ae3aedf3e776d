#pragma once

#include <stdexcept>
#include <string>

namespace cuspmi {

// Truncated evaluation could not reach the requested tolerance (tail too large,
// evaluation point too close to the real axis). The CLI maps this to exit code 2.
class precision_error : public std::runtime_error {
public:
    explicit precision_error(const std::string& what) : std::runtime_error(what) {}
};

// Series requested outside its convergence range.
class convergence_error : public std::runtime_error {
public:
    explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

// Internal arithmetic inconsistency (singular change of basis, degree overflow,
// non-integral dimension). Never expected for valid input.
class consistency_error : public std::logic_error {
public:
    explicit consistency_error(const std::string& what) : std::logic_error(what) {}
};

}  // namespace cuspmi
