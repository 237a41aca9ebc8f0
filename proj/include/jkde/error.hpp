#pragma once

#include <stdexcept>
#include <string>

namespace jkde {

//! Malformed or inconsistent input data (CSV content, model files, grids).
class DataError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! A numerical routine could not deliver a usable result.
class NumericError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

} // namespace jkde
