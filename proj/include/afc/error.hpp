#pragma once

#include <stdexcept>
#include <string>

namespace afc {

// Base for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input files (FASTA, manifests, model files).
class InputError : public Error {
  public:
    using Error::Error;
};

// Invalid parameters or configuration (bad k, fold counts, grids).
class ConfigError : public Error {
  public:
    using Error::Error;
};

// A sequence has fewer residues than the requested word length.
class ShortSequenceError : public Error {
  public:
    using Error::Error;
};

// Model estimation failed (degenerate classes, non-finite data).
class FitError : public Error {
  public:
    using Error::Error;
};

}  // namespace afc
