#pragma once

#include <stdexcept>
#include <string>

namespace octoroll {

struct ZeroDivisorError : std::domain_error {
  explicit ZeroDivisorError(const std::string& what) : std::domain_error(what) {}
};

struct InfiniteRhoError : std::domain_error {
  explicit InfiniteRhoError(const std::string& what) : std::domain_error(what) {}
};

struct NonHorizontalDrift : std::runtime_error {
  explicit NonHorizontalDrift(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateCone : std::runtime_error {
  explicit DegenerateCone(const std::string& what) : std::runtime_error(what) {}
};

struct ChartOverflow : std::runtime_error {
  explicit ChartOverflow(const std::string& what) : std::runtime_error(what) {}
};

struct LeavesRegularLocus : std::runtime_error {
  explicit LeavesRegularLocus(const std::string& what) : std::runtime_error(what) {}
};

struct TransportSingular : std::runtime_error {
  explicit TransportSingular(const std::string& what) : std::runtime_error(what) {}
};

struct FramesNotTransverse : std::runtime_error {
  explicit FramesNotTransverse(const std::string& what) : std::runtime_error(what) {}
};

struct FormVanishes : std::runtime_error {
  explicit FormVanishes(const std::string& what) : std::runtime_error(what) {}
};

struct DomainError : std::domain_error {
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

struct DegenerateSamples : std::runtime_error {
  explicit DegenerateSamples(const std::string& what) : std::runtime_error(what) {}
};

// Central tolerance constants. Membership predicates (cone tests, flag
// annihilators) use the looser value; exact algebraic identities the tighter.
namespace tol {
inline constexpr double membership = 1e-10;
inline constexpr double identity = 1e-12;
inline constexpr double rank_svd = 1e-9;
}  // namespace tol

}  // namespace octoroll
