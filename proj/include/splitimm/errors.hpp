#pragma once

#include <stdexcept>
#include <string>

namespace splitimm {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Model is not supercritical (mean offspring <= 1) where supercriticality is required.
struct SubcriticalError : Error {
  using Error::Error;
};

// Adaptive quadrature or root finding failed to reach the requested tolerance.
struct NumericalError : Error {
  using Error::Error;
};

// Simulation exceeded the configured population cap.
struct ResourceError : Error {
  using Error::Error;
};

// The scale-function solver produced a non-increasing W.
struct SolverError : Error {
  using Error::Error;
};

struct InputError : Error {
  using Error::Error;
};

}  // namespace splitimm
