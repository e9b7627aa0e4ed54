#pragma once

#include <stdexcept>
#include <string>

namespace propproc {

// Error categories map onto CLI exit codes: config 2, data 3, numeric 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// registry ingestion
class MissingColumn : public DataError {
 public:
  using DataError::DataError;
};

class UnknownSubject : public DataError {
 public:
  using DataError::DataError;
};

class NonMonotoneVisits : public DataError {
 public:
  using DataError::DataError;
};

class PostTreatmentVisit : public DataError {
 public:
  using DataError::DataError;
};

// spline fitting / curve evaluation
class OutOfDomain : public NumericError {
 public:
  using NumericError::NumericError;
};

class InsufficientData : public DataError {
 public:
  using DataError::DataError;
};

// Cox fitting
class NoEvents : public DataError {
 public:
  using DataError::DataError;
};

class EvaluationFailure : public NumericError {
 public:
  using NumericError::NumericError;
};

class SingularInformation : public NumericError {
 public:
  using NumericError::NumericError;
};

// paths and matching
class GridMismatch : public NumericError {
 public:
  using NumericError::NumericError;
};

class EmptyRegistry : public DataError {
 public:
  using DataError::DataError;
};

class NegativeHazard : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace propproc
