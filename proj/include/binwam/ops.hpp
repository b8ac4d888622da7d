#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace binwam {

// Fixed operator table; the supported corpus needs no user-defined operators.
enum class OpType { Xfx, Xfy, Yfx, Fy };

struct OpDef {
  int prec;
  OpType type;
};

inline std::optional<OpDef> infix_op(std::string_view name) {
  if (name == ":-") return OpDef{1200, OpType::Xfx};
  if (name == ";") return OpDef{1100, OpType::Xfy};
  if (name == "->") return OpDef{1050, OpType::Xfy};
  if (name == ",") return OpDef{1000, OpType::Xfy};
  if (name == "=" || name == "\\==" || name == "==" || name == "is" ||
      name == "<" || name == ">" || name == "=<" || name == ">=" ||
      name == "=:=" || name == "=\\=" || name == "=>" || name == "@<" ||
      name == "@>")
    return OpDef{700, OpType::Xfx};
  if (name == "+" || name == "-") return OpDef{500, OpType::Yfx};
  if (name == "*" || name == "/" || name == "//" || name == "mod")
    return OpDef{400, OpType::Yfx};
  return std::nullopt;
}

inline std::optional<OpDef> prefix_op(std::string_view name) {
  if (name == "-") return OpDef{200, OpType::Fy};
  return std::nullopt;
}

}  // namespace binwam
