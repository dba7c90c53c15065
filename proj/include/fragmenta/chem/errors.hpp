#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fragmenta::chem {

class ChemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Base of every error raised while reading SMILES. `position` is the byte
/// offset of the offending character, or npos when not tied to one.
class SmilesError : public ChemError {
 public:
  SmilesError(const std::string& what, std::size_t position = std::string::npos)
      : ChemError(what), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class SyntaxError : public SmilesError {
 public:
  using SmilesError::SmilesError;
};

class UnsupportedFeature : public SmilesError {
 public:
  using SmilesError::SmilesError;
};

class MultiComponentError : public SmilesError {
 public:
  using SmilesError::SmilesError;
};

/// An atom exceeds its allowed valence, or an aromatic system cannot be kekulized.
class ValenceError : public SmilesError {
 public:
  using SmilesError::SmilesError;
};

class WidthMismatch : public ChemError {
 public:
  using ChemError::ChemError;
};

}  // namespace fragmenta::chem
