#pragma once

#include <string>
#include <string_view>
#include <variant>

namespace tacticrl {

namespace tactic {
struct Intro { std::string name; };
struct Split {};
struct Left {};
struct Right {};
struct Exact { std::string name; };
struct Assumption {};
struct Apply { std::string name; };
struct Cases { std::string name; };
struct Trivial {};
}  // namespace tactic

using ParsedTactic =
    std::variant<tactic::Intro, tactic::Split, tactic::Left, tactic::Right, tactic::Exact,
                 tactic::Assumption, tactic::Apply, tactic::Cases, tactic::Trivial>;

/// `[a-z][a-z0-9_]*`
bool is_identifier(std::string_view s);

/// Exact-match parse: one space between keyword and identifier, nothing else.
/// Throws ParseError.
ParsedTactic parse_tactic(std::string_view text);

std::string render(const ParsedTactic& t);

}  // namespace tacticrl
