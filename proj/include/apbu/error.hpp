#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace apbu {

// All recoverable failures carry a stable machine-readable kind next to the
// human-readable message. Scenario scripts match on the kind (`expect-error`).
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

private:
  std::string kind_;
};

namespace errkind {
inline constexpr const char* parse = "ParseError";
inline constexpr const char* undeclared = "UndeclaredIdentifier";
inline constexpr const char* announcement_false = "AnnouncementFalseAtPoint";
inline constexpr const char* empty_submodel = "EmptySubmodel";
inline constexpr const char* point_not_inconsistent = "PointNotInconsistent";
inline constexpr const char* not_introspective = "NotIntrospective";
inline constexpr const char* coherency = "CoherencyFailure";
inline constexpr const char* not_partial_equivalence = "NotPartialEquivalence";
inline constexpr const char* not_a_cluster = "NotACluster";
inline constexpr const char* vocabulary = "VocabularyMismatch";
inline constexpr const char* io = "IoError";
}  // namespace errkind

}  // namespace apbu
