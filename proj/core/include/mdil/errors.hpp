// errors.hpp
// Typed error hierarchy shared by all mdil components.

#pragma once

#include <stdexcept>
#include <string>

namespace mdil {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A matrix entry or distribution weight is negative.
struct NegativeEntry : Error {
  using Error::Error;
};

// A row sum deviates from 1 beyond the validation tolerance.
struct RowSumDeviation : Error {
  RowSumDeviation(int row_index, double dev)
      : Error("row " + std::to_string(row_index) + " sums to 1 " +
              (dev >= 0 ? "+ " : "- ") + std::to_string(dev >= 0 ? dev : -dev)),
        row(row_index),
        deviation(dev) {}
  int row;
  double deviation;
};

// A time index lies beyond the available sequence or input laws.
struct HorizonExceeded : Error {
  using Error::Error;
};

// A map label lies outside 0 .. N^N-1.
struct LabelOutOfRange : Error {
  using Error::Error;
};

// N^N (or N * N^N) exceeds the configured cap.
struct LabelSpaceTooLarge : Error {
  using Error::Error;
};

// The greedy decomposition stalled; the input is numerically invalid.
struct NonConvergence : Error {
  using Error::Error;
};

// Coupling completion could not be closed into a bijection.
struct CompletionImpossible : Error {
  using Error::Error;
};

// A dynamics step touched an unmaterialized environment coordinate.
struct WindowUnderflow : Error {
  using Error::Error;
};

// A decomposition label is missing from the environment alphabet.
struct LabelNotInAlphabet : Error {
  using Error::Error;
};

// Exact enumeration would exceed the configured cap.
struct EnumerationTooLarge : Error {
  using Error::Error;
};

// Kraus operators fail sum K'K = 1; inputs are inconsistent.
struct UnitalityViolation : Error {
  using Error::Error;
};

struct DimMismatch : Error {
  using Error::Error;
};

// A dense operator would exceed the dense-dimension cap.
struct DimensionTooLarge : Error {
  using Error::Error;
};

// A window of environment sites is too wide for dense realization.
struct WindowTooLarge : Error {
  using Error::Error;
};

struct NotAPermutation : Error {
  using Error::Error;
};

// Malformed external input (JSON schema, CLI arguments).
struct BadInput : Error {
  using Error::Error;
};

}  // namespace mdil
