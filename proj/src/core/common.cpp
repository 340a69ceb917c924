#include "msopt/common.hpp"

namespace msopt {

std::string_view to_string(Variant v) {
    return v == Variant::KktStandard ? "kkt-standard" : "paper-verbatim";
}

Variant parse_variant(std::string_view text) {
    if (text == "kkt-standard") return Variant::KktStandard;
    if (text == "paper-verbatim") return Variant::PaperVerbatim;
    throw ConfigError("variant", "expected kkt-standard or paper-verbatim, got '" + std::string(text) + "'");
}

}  // namespace msopt
