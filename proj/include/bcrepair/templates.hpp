#ifndef BCREPAIR_TEMPLATES_HPP
#define BCREPAIR_TEMPLATES_HPP

#include <string>
#include <vector>

#include "bcrepair/donor.hpp"
#include "bcrepair/faultloc.hpp"

namespace bcrepair {

struct NoViableMutation : std::runtime_error {
    explicit NoViableMutation(const std::string& what) : std::runtime_error(what) {}
};

// Fix-template identity. `variant` 0 means the category has a single
// unnumbered template (T4, T12).
struct TemplateId {
    u1 category = 0;
    u1 variant = 0;
    bool avr_specific = false;
    auto operator<=>(const TemplateId&) const = default;
};

std::string template_name(TemplateId id);  // "T3.1", "T4", ...

// The closed catalog: 14 categories, 33 variants, 13 of them
// vulnerability-specific, in fixed order T1.1 .. T14.2.
const std::vector<TemplateId>& template_catalog();

struct TemplateMatch {
    TemplateId id;
    MethodId method;
    Location location;
    Label anchor = 0;                  // the matched instruction
    std::vector<Label> site_labels;    // all instructions of the site line
    double suspiciousness = 0.0;
};

struct Mutant {
    MethodId method;
    TemplateId provenance;
    std::vector<EditOp> edits;
    std::vector<ExceptionHandler> added_handlers;
    u2 new_max_locals = 0;  // 0 = unchanged
    int instruction_delta = 0;
    std::string description;
};

struct GenerateOptions {
    int max_donors = 50;  // cap per (template, site) pair
};

// Matches every catalog template against one site's instructions, in catalog
// order then anchor-label order. No match yields an empty list.
std::vector<TemplateMatch> match_templates(const CodeBody& body, const SiteInstructions& site,
                                           const Location& location, const MethodId& method,
                                           const ClassFile& cf, const ClassIndex& index);

// Instantiates one match against the donor pool. Appends constants to
// `cf.pool` as needed (append-only). Mutants that fail stack-depth
// recomputation are filtered here.
std::vector<Mutant> generate_mutants(const TemplateMatch& match, const CodeBody& body,
                                     ClassFile& cf, const DonorPool& donors,
                                     const ClassIndex& index, const GenerateOptions& opts);

// Edit script plus handler additions and max_locals growth, applied to a body.
CodeBody apply_mutant(const CodeBody& body, const Mutant& m);

}  // namespace bcrepair

#endif
