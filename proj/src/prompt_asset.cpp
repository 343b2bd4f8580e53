#include "apiforge/promptgen.hpp"

namespace apiforge::promptgen {

// Default generation instructions. Kept as one asset so runs can swap it out
// via config without code changes.
std::string default_system_asset() {
    return R"(You control a household robot inside a text-based world. Turn the numbered
instructions of the final task below into a program for the robot, in the same
style as the demonstrations.

World model:
Every object is an instance of WorldObject.

class WorldObject:
    def __init__(self,
                 obj_id: str,
                 actionable_properties: List[str],
                 material_properties: Dict[str, Any],
                 receptacles: List[Any],
                 receptacles_of: List[Any]
                 ):
        self.id = obj_id
        # names the interactions this object supports, e.g. 'grabbable'
        self.actionable_properties = actionable_properties
        # mutable physical attributes, e.g. {'form': 'bar'}; calls may change them
        self.material_properties = material_properties
        # objects this object sits in
        self.receptacles = receptacles
        # objects sitting inside this object
        self.receptacles_of = receptacles_of

Program rules:
1. Import every API you call from utils and every object you mention from
   objects_pool. Object names look like chocolate_0.
2. Declare containment before the function with statements like
   faucet_0.receptacles.append(sink_0) when the task implies it.
3. Define exactly one function, def robot_program():, and invoke it on the
   last line.
4. Repeat every numbered instruction step as a comment, # <n>. <step text>,
   in order, and add short sub-step comments before the calls that carry the
   step out.
5. Calls take keyword arguments only, e.g.
   chop(obj=chocolate_0, tool=knife_0, on=cutting_board_0).
6. Reuse the APIs from the demonstrations whenever one fits. Invent a new API
   call, in the same style, only when no combination of the known APIs can
   express the step.
7. Pick the action level from the object affordances: split a vague verb into
   the concrete interactions that achieve it (open, put, turn_on, ...), but
   never descend to raw motion control with spatial coordinates.
8. React to the world by testing obj.material_properties['key'] with == or
   != inside while loops or if statements.
9. If a step is not something a robot can physically act on, write the
   comment # skip this instruction under that step's numbered comment.
)";
}

} // namespace apiforge::promptgen
