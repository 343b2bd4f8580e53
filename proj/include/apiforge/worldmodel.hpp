#pragma once
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace apiforge::worldmodel {

// Material property values are flat scalars, text or number.
using Scalar = std::variant<std::string, double>;

struct WorldObject {
    std::string id;                                   // e.g. "chocolate_0"
    std::vector<std::string> actionable_properties;   // uninterpreted tags
    std::map<std::string, Scalar> material_properties;
    std::vector<std::string> receptacles;             // ids of containers of this object
    std::vector<std::string> receptacles_of;          // ids of objects contained in this one

    bool operator==(const WorldObject&) const = default;
};

// Object ids are a lowercase token, an underscore, and a non-negative index.
bool is_object_id(const std::string& id);

enum class Provenance { Seed, Induced };

struct ApiSignature {
    std::string name;
    std::set<std::string> keyword_params;   // observed keyword-argument names
    Provenance provenance = Provenance::Induced;

    bool operator==(const ApiSignature&) const = default;
};

// The seed primitive-action registry. Constant across calls and runs.
std::vector<ApiSignature> base_registry();

// Records that `contained` sits inside `container`, both directions.
// Idempotent; throws Error("SelfContainment") when ids match.
void link_receptacle(WorldObject& container, WorldObject& contained);

// True when the receptacle symmetry invariant holds over the given objects
// (ids outside the map are ignored).
bool receptacle_symmetry_holds(const std::map<std::string, WorldObject>& objects);

} // namespace apiforge::worldmodel
