#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace tacticrl {

inline constexpr int kMaxAtoms = 8;

enum class Connective : std::uint8_t { Atom, Top, Bottom, And, Or, Implies };

/// Immutable propositional formula. Copies share the underlying tree;
/// equality is structural.
class Formula {
 public:
  /// Default-constructed formula is Top.
  Formula();
  static Formula atom(int index);
  static Formula top();
  static Formula bottom();
  static Formula conj(Formula left, Formula right);
  static Formula disj(Formula left, Formula right);
  static Formula implies(Formula premise, Formula conclusion);

  Connective kind() const { return node_->kind; }
  bool is(Connective c) const { return node_->kind == c; }
  int atom_index() const { return node_->atom; }
  /// Children of a binary connective; calling on a leaf is undefined.
  Formula left() const { return Formula(node_->children[0]); }
  Formula right() const { return Formula(node_->children[1]); }

  int depth() const { return node_->depth; }
  /// Bit i set iff atom i occurs.
  std::uint8_t atom_mask() const { return node_->atoms; }
  std::size_t hash() const { return node_->hash; }

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  struct Node {
    Connective kind;
    int atom = -1;
    int depth = 1;
    std::uint8_t atoms = 0;
    std::size_t hash = 0;
    std::array<std::shared_ptr<const Node>, 2> children;
  };
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Formula make(Connective kind, int atom, const Formula* l, const Formula* r);
  static bool equal_nodes(const Node* a, const Node* b);
  std::shared_ptr<const Node> node_;
};

/// Letter used for an atom index (skips `F`, which denotes Bottom).
char atom_letter(int index);

/// Parse under `f := f1 ('->' f)?`, `f1 := f2 ('|' f2)*`,
/// `f2 := f3 ('&' f3)*`, `f3 := atom | 'T' | 'F' | '(' f ')'`.
/// Spaces between tokens are ignored. Throws ParseError.
Formula parse_formula(std::string_view text);

/// Canonical ASCII rendering with minimal parentheses.
std::string render(const Formula& f);

/// Final conclusion of a right-nested implication chain.
Formula final_conclusion(const Formula& f);

/// Truth table of `f` over all 2^atom_count assignments, one bit per row.
using TruthTable = std::array<std::uint64_t, 4>;
TruthTable truth_table(const Formula& f, int atom_count);
bool classically_valid(const Formula& f, int atom_count);

}  // namespace tacticrl

template <>
struct std::hash<tacticrl::Formula> {
  std::size_t operator()(const tacticrl::Formula& f) const noexcept { return f.hash(); }
};
