#include "tacticrl/tactic.hpp"

#include <string>

#include "tacticrl/errors.hpp"

namespace tacticrl {

bool is_identifier(std::string_view s) {
  if (s.empty() || s[0] < 'a' || s[0] > 'z') return false;
  for (char c : s) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return true;
}

ParsedTactic parse_tactic(std::string_view text) {
  if (text == "split") return tactic::Split{};
  if (text == "left") return tactic::Left{};
  if (text == "right") return tactic::Right{};
  if (text == "assumption") return tactic::Assumption{};
  if (text == "trivial") return tactic::Trivial{};

  auto space = text.find(' ');
  if (space != std::string_view::npos) {
    std::string_view keyword = text.substr(0, space);
    std::string_view ident = text.substr(space + 1);
    if (is_identifier(ident)) {
      std::string name(ident);
      if (keyword == "intro") return tactic::Intro{name};
      if (keyword == "exact") return tactic::Exact{name};
      if (keyword == "apply") return tactic::Apply{name};
      if (keyword == "cases") return tactic::Cases{name};
    }
  }
  throw ParseError("invalid tactic \"" + std::string(text) + "\"");
}

std::string render(const ParsedTactic& t) {
  struct Renderer {
    std::string operator()(const tactic::Intro& x) const { return "intro " + x.name; }
    std::string operator()(const tactic::Split&) const { return "split"; }
    std::string operator()(const tactic::Left&) const { return "left"; }
    std::string operator()(const tactic::Right&) const { return "right"; }
    std::string operator()(const tactic::Exact& x) const { return "exact " + x.name; }
    std::string operator()(const tactic::Assumption&) const { return "assumption"; }
    std::string operator()(const tactic::Apply& x) const { return "apply " + x.name; }
    std::string operator()(const tactic::Cases& x) const { return "cases " + x.name; }
    std::string operator()(const tactic::Trivial&) const { return "trivial"; }
  };
  return std::visit(Renderer{}, t);
}

}  // namespace tacticrl
