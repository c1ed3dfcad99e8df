#pragma once

#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cotforge/errors.hpp"
#include "cotforge/text.hpp"

namespace cotforge {

/// The seven clinical departments covered by the toolkit.
enum class Department {
    Respiratory,
    Gastroenterology,
    Urology,
    Cardiology,
    Immunology,
    Neurology,
    Endocrinology,
};

inline constexpr std::array<Department, 7> kDepartments = {
    Department::Respiratory,    Department::Gastroenterology, Department::Urology,
    Department::Cardiology,     Department::Immunology,       Department::Neurology,
    Department::Endocrinology,
};

inline std::string to_string(Department d) {
    switch (d) {
        case Department::Respiratory: return "Respiratory";
        case Department::Gastroenterology: return "Gastroenterology";
        case Department::Urology: return "Urology";
        case Department::Cardiology: return "Cardiology";
        case Department::Immunology: return "Immunology";
        case Department::Neurology: return "Neurology";
        case Department::Endocrinology: return "Endocrinology";
    }
    return "?";
}

inline Department department_from_string(std::string_view s) {
    for (Department d : kDepartments) {
        if (to_string(d) == s) return d;
    }
    throw ValidationError("unknown department \"" + std::string(s) + "\"");
}

enum class Language { zh, en };

inline std::string to_string(Language l) { return l == Language::zh ? "zh" : "en"; }

inline Language language_from_string(std::string_view s) {
    if (s == "zh") return Language::zh;
    if (s == "en") return Language::en;
    throw ValidationError("unknown language \"" + std::string(s) + "\" (expected zh or en)");
}

/// Validates a code against ^[A-Z][0-9]{2}(\.[0-9A-Z]{1,4})?$
inline bool is_valid_icd10(std::string_view code) {
    if (code.size() < 3) return false;
    if (code[0] < 'A' || code[0] > 'Z') return false;
    if (!std::isdigit(static_cast<unsigned char>(code[1])) ||
        !std::isdigit(static_cast<unsigned char>(code[2]))) {
        return false;
    }
    if (code.size() == 3) return true;
    if (code[3] != '.') return false;
    std::size_t suffix = code.size() - 4;
    if (suffix < 1 || suffix > 4) return false;
    for (std::size_t i = 4; i < code.size(); ++i) {
        char c = code[i];
        bool ok = (c >= '0' && c <= '9') || (c >= 'A' && c <= 'Z');
        if (!ok) return false;
    }
    return true;
}

/// Three-character category prefix, e.g. "E11" for "E11.9".
inline std::string icd10_category(std::string_view code) {
    return std::string(code.substr(0, 3));
}

/// Uppercases and strips everything but letters and digits, so "e11.9",
/// "E11.9" and "e119" all canonicalize to "E119". Returns nullopt when the
/// result is not a well-formed dotless code.
inline std::optional<std::string> canonical_icd10(std::string_view text) {
    std::string c;
    for (char ch : text) {
        unsigned char uc = static_cast<unsigned char>(ch);
        if (std::isalnum(uc)) c.push_back(static_cast<char>(std::toupper(uc)));
    }
    if (c.size() < 3 || c.size() > 7) return std::nullopt;
    if (c[0] < 'A' || c[0] > 'Z') return std::nullopt;
    if (!std::isdigit(static_cast<unsigned char>(c[1])) ||
        !std::isdigit(static_cast<unsigned char>(c[2]))) {
        return std::nullopt;
    }
    for (std::size_t i = 3; i < c.size(); ++i) {
        if (!std::isalnum(static_cast<unsigned char>(c[i]))) return std::nullopt;
    }
    return c;
}

// ---------------------------------------------------------------------------
// Taxonomy
// ---------------------------------------------------------------------------

struct TaxonomyNode {
    std::string code;         // prefix for inner nodes, full code for leaves
    std::string description;
    std::optional<Department> department;  // set on the node or inherited
    std::vector<TaxonomyNode> children;

    bool is_leaf() const { return children.empty(); }
};

/// Tree of ICD-10 prefixes. Leaves carry full codes and each leaf resolves to
/// exactly one department (its own tag or the nearest tagged ancestor).
class IcdTaxonomy {
public:
    explicit IcdTaxonomy(std::vector<TaxonomyNode> roots) : roots_(std::move(roots)) {
        std::set<std::string> seen;
        for (auto& r : roots_) {
            index_subtree(r, std::nullopt, seen);
        }
    }

    const std::vector<TaxonomyNode>& roots() const { return roots_; }

    std::size_t leaf_count() const { return leaf_department_.size(); }

    std::optional<Department> department_of(const std::string& code) const {
        auto it = leaf_department_.find(code);
        if (it == leaf_department_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<std::string> description_of(const std::string& code) const {
        auto it = leaf_description_.find(code);
        if (it == leaf_description_.end()) return std::nullopt;
        return it->second;
    }

    std::vector<std::string> codes_in(Department d) const {
        std::vector<std::string> out;
        for (const auto& [code, dept] : leaf_department_) {
            if (dept == d) out.push_back(code);
        }
        return out;
    }

private:
    void index_subtree(const TaxonomyNode& node, std::optional<Department> inherited,
                       std::set<std::string>& seen) {
        std::optional<Department> dept = node.department ? node.department : inherited;
        if (node.is_leaf()) {
            if (!is_valid_icd10(node.code)) {
                throw ValidationError("taxonomy leaf \"" + node.code +
                                      "\" is not a valid ICD-10 code");
            }
            if (!dept) {
                throw ValidationError("taxonomy leaf \"" + node.code +
                                      "\" maps to no department");
            }
            if (!seen.insert(node.code).second) {
                throw ValidationError("duplicate code \"" + node.code + "\" in taxonomy");
            }
            leaf_department_.emplace(node.code, *dept);
            leaf_description_.emplace(node.code, node.description);
            return;
        }
        for (const auto& child : node.children) {
            if (!starts_with(child.code, node.code)) {
                throw ValidationError("taxonomy child \"" + child.code +
                                      "\" does not extend prefix \"" + node.code + "\"");
            }
            index_subtree(child, dept, seen);
        }
    }

    std::vector<TaxonomyNode> roots_;
    std::map<std::string, Department> leaf_department_;
    std::map<std::string, std::string> leaf_description_;
};

}  // namespace cotforge
