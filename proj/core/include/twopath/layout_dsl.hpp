#pragma once

// Text format for interferometer layouts (.ifl files).
//
//   # comment to end of line
//   particle { k = 10; ell = 1000; label = "excited Rb"; }
//   path upper { segment(length=10); cavity(length=2, gamma_ratio=0); segment(length=8); }
//   path lower { segment(length=20); phase(phi=0); }
//   splitter { convention = symmetric; }          # symmetric | hadamard | general
//   sweep { parameter = gamma_ratio; start = 0; end = 10; steps = 101; scale = linear; }
//   oracle { packet_width = 10; tolerance = 1e-4; }
//
// The particle takes either the dimensionless pair k, ell (ell = inf for a
// stable particle) or SI momentum_si [kg m/s], mass_si [kg], gamma_si [1/s],
// converted at parse time to k = p/hbar [1/m] and ell = p/(m gamma) [m].
// Layout lengths are then in metres.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twopath/model.hpp"
#include "twopath/oracle.hpp"
#include "twopath/sweep.hpp"

namespace twopath {

inline constexpr double kReducedPlanck = 1.054571817e-34;  // J s

enum class DiagnosticCode {
  lex_unexpected_character,
  lex_unterminated_string,
  lex_malformed_number,
  syntax_unexpected_token,
  unknown_section,
  unknown_path,
  unknown_element,
  unknown_key,
  duplicate_section,
  duplicate_key,
  missing_section,
  missing_key,
  type_mismatch,
  invalid_enum_value,
  mixed_units,
  constraint_negative_length,
  constraint_negative_gamma_ratio,
  constraint_free_gamma_ratio,
  constraint_nonpositive,
  constraint_nonfinite,
  constraint_empty_path,
  constraint_potential_samples,
  constraint_sweep,
};

// Stable upper-case identifier, e.g. "CONSTRAINT_NEGATIVE_LENGTH".
[[nodiscard]] std::string_view code_name(DiagnosticCode code);

struct Diagnostic {
  DiagnosticCode code{};
  std::size_t offset = 0;  // byte offset into the input
  std::size_t line = 1;    // 1-based
  std::size_t column = 1;  // 1-based, in bytes
  std::string token;
  std::string message;
  std::string hint;

  bool operator==(const Diagnostic&) const = default;
};

struct LayoutDocument {
  UnstableParticle particle;
  TwoPathLayout layout;
  std::optional<SweepSpec> sweep;
  std::optional<OracleSettings> oracle;

  bool operator==(const LayoutDocument&) const = default;
};

struct ParseResult {
  std::optional<LayoutDocument> document;
  std::vector<Diagnostic> diagnostics;

  [[nodiscard]] bool ok() const { return document.has_value(); }
};

// Never throws on malformed input; a document is returned only when there
// are no diagnostics.
[[nodiscard]] ParseResult parse(std::string_view text);

// Canonical text: fixed section order, sorted keys, shortest round-trip
// numbers. parse(serialize(d)) reproduces d.
[[nodiscard]] std::string serialize(const LayoutDocument& document);

// "name:line:col: error[CODE]: message (near 'tok')" plus an indented hint line.
[[nodiscard]] std::string format_diagnostic(const Diagnostic& diagnostic,
                                            std::string_view source_name);

}  // namespace twopath
