#ifndef QKPZ_TREE_IO_HPP
#define QKPZ_TREE_IO_HPP

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qkpz/tree.hpp"

namespace qkpz {

struct ParseError : std::runtime_error {
    size_t position;
    std::string expected;
    ParseError(size_t pos, const std::string& exp)
        : std::runtime_error("parse error at position " + std::to_string(pos) +
                             ", expected " + exp),
          position(pos),
          expected(exp) {}
};

// Grammar:
//   tree      := node ("*" node)*
//   node      := noise "[" childlist? "]" | noise
//   noise     := "Xi" | "One" | "X^(" nat "," nat ")" noise?
//   childlist := child ("," child)*
//   child     := edge "(" tree ")"
//   edge      := ("I" | "Ix") ("{" nat "}")?
// "Ix" means st=(0,1); "{n}" means h=n.  As an extension beyond the two
// standard edge kinds, "I^(t,x)" denotes a general space-time part.
TreePtr parse_tree(const std::string& text);

std::string render_tree(const TreePtr& tau);

nlohmann::json tree_to_json(const TreePtr& tau);
TreePtr tree_from_json(const nlohmann::json& j);

}  // namespace qkpz

#endif
