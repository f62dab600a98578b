#pragma once

#include <stdexcept>

namespace geodid {

//! Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

//! Problems with input data: malformed files, schema mismatches, invalid
//! panels. The CLI maps these to exit code 3.
class DataError : public Error {
public:
  using Error::Error;
};

//! A required column is missing from the input header.
class SchemaError : public DataError {
public:
  using DataError::DataError;
};

//! A cell failed to parse; the message cites the offending row.
class ParseError : public DataError {
public:
  using DataError::DataError;
};

//! A value is outside its admissible set (period not in {0,1}, invalid
//! simulator spec, nonsensical estimator configuration, ...).
class DomainError : public DataError {
public:
  using DataError::DataError;
};

//! Problems encountered during estimation. The CLI maps these to exit code 4.
class EstimationError : public Error {
public:
  using Error::Error;
};

//! Too few usable observations; the message names the offending side.
class InsufficientDataError : public EstimationError {
public:
  using EstimationError::EstimationError;
};

//! Rank-deficient design matrix (e.g. all distances equal on one side).
class SingularityError : public EstimationError {
public:
  using EstimationError::EstimationError;
};

//! Bandwidth selection could not produce a usable bandwidth.
class NoFeasibleBandwidthError : public EstimationError {
public:
  using EstimationError::EstimationError;
};

//! Standard errors cannot be computed (non-positive degrees of freedom).
//! Point estimates are still returned upstream with the SE marked
//! unavailable.
class InferenceError : public EstimationError {
public:
  using EstimationError::EstimationError;
};

//! Every Monte Carlo replication failed; carries the first failure message.
class HarnessError : public EstimationError {
public:
  using EstimationError::EstimationError;
};

}  // namespace geodid
