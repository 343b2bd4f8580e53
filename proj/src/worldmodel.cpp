#include "apiforge/worldmodel.hpp"
#include "apiforge/errors.hpp"

#include <algorithm>
#include <cctype>

namespace apiforge::worldmodel {

bool is_object_id(const std::string& id) {
    size_t sep = id.rfind('_');
    if (sep == std::string::npos || sep == 0 || sep + 1 == id.size()) return false;
    for (size_t i = sep + 1; i < id.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(id[i]))) return false;
    if (!std::islower(static_cast<unsigned char>(id[0]))) return false;
    for (size_t i = 0; i < sep; ++i) {
        unsigned char c = static_cast<unsigned char>(id[i]);
        if (!(std::islower(c) || std::isdigit(c) || c == '_')) return false;
    }
    return true;
}

std::vector<ApiSignature> base_registry() {
    auto seed = [](const char* name, std::set<std::string> params) {
        return ApiSignature{name, std::move(params), Provenance::Seed};
    };
    return {
        seed("find", {"obj"}),
        seed("grab", {"obj"}),
        seed("put", {"obj", "target"}),
        seed("put_back", {"obj"}),
        seed("open_obj", {"obj"}),
        seed("close_obj", {"obj"}),
        seed("turn_on", {"obj", "power", "duration"}),
        seed("turn_off", {"obj"}),
        seed("sleep", {"duration"}),
    };
}

namespace {

void append_unique(std::vector<std::string>& list, const std::string& id) {
    if (std::find(list.begin(), list.end(), id) == list.end()) list.push_back(id);
}

} // namespace

void link_receptacle(WorldObject& container, WorldObject& contained) {
    if (container.id == contained.id)
        throw Error("SelfContainment", "object '" + container.id + "' cannot contain itself");
    append_unique(contained.receptacles, container.id);
    append_unique(container.receptacles_of, contained.id);
}

bool receptacle_symmetry_holds(const std::map<std::string, WorldObject>& objects) {
    auto contains = [](const std::vector<std::string>& list, const std::string& id) {
        return std::find(list.begin(), list.end(), id) != list.end();
    };
    for (const auto& [id, obj] : objects) {
        for (const auto& container_id : obj.receptacles) {
            auto it = objects.find(container_id);
            if (it != objects.end() && !contains(it->second.receptacles_of, id)) return false;
        }
        for (const auto& contained_id : obj.receptacles_of) {
            auto it = objects.find(contained_id);
            if (it != objects.end() && !contains(it->second.receptacles, id)) return false;
        }
    }
    return true;
}

} // namespace apiforge::worldmodel
