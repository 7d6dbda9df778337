#pragma once

#include <stdexcept>
#include <string>

namespace otq {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two sites coincide exactly; power cells are undefined on the diagonal.
class DuplicateSites : public Error {
 public:
  DuplicateSites(int i, int j)
      : Error("duplicate sites"), first(i), second(j) {}
  int first;
  int second;
};

class ZeroMass : public Error {
 public:
  ZeroMass() : Error("density has zero total mass") {}
};

class EmptyCell : public Error {
 public:
  explicit EmptyCell(int i)
      : Error("power cell " + std::to_string(i) + " carries no mass"), index(i) {}
  int index;
};

class EpsilonTooLarge : public Error {
 public:
  EpsilonTooLarge(double eps, double min_dist)
      : Error("epsilon " + std::to_string(eps) + " exceeds min pairwise distance " +
              std::to_string(min_dist)) {}
};

class NonSquareN : public Error {
 public:
  explicit NonSquareN(int n)
      : Error("grid initialization needs a square point count, got " + std::to_string(n)) {}
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace otq
