#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spur/frame.hpp"
#include "spur/ledger.hpp"
#include "spur/trigger.hpp"

namespace spur {

enum class EventKind { scene_change, stall_zone, repetition_trap, hard_failure };

std::string event_kind_name(EventKind kind);
EventKind parse_event_kind(const std::string& name);

/// A scripted disturbance firing at a 1-based step index. Zone events
/// (stall, repetition trap) stay active for `duration` steps; scene
/// change and hard failure are instantaneous.
struct ScriptedEvent {
    int step = 0;
    EventKind kind = EventKind::scene_change;
    int duration = 1;
};

enum class Facing { up, down, left, right };

std::string facing_name(Facing f);
Facing parse_facing(const std::string& name);

struct Scenario {
    std::string name;
    int width = 0;
    int height = 0;
    std::vector<std::pair<int, int>> walls;
    int agent_x = 0;
    int agent_y = 0;
    Facing agent_facing = Facing::right;
    int target_x = 0;
    int target_y = 0;
    std::string required_tool;
    std::vector<std::string> tools;
    std::vector<ScriptedEvent> events;
    int rng_seed = 42;
};

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);

/// One observation: rendered frame, UI text, and runner feedback for
/// the action just executed.
struct EnvStep {
    Frame frame;
    std::string ui_text;
    RunnerFeedback feedback;
};

/// Deterministic gridworld that manufactures the four disturbance
/// kinds (scene change, stall, repetition loop, execution failure) on a
/// script, so trigger and recovery behavior is reproducible.
class GridWorld {
public:
    static GridWorld from_scenario(const Scenario& scenario);

    int width() const { return width_; }
    int height() const { return height_; }
    int step_index() const { return step_index_; }
    int agent_x() const { return agent_x_; }
    int agent_y() const { return agent_y_; }
    Facing facing() const { return facing_; }
    int target_x() const { return target_x_; }
    int target_y() const { return target_y_; }
    const std::string& selected_tool() const { return selected_tool_; }
    const std::string& required_tool() const { return required_tool_; }
    const std::vector<std::string>& tools() const { return tools_; }

    bool is_wall(int x, int y) const;
    bool in_bounds(int x, int y) const;

    /// Valid action identifiers for this world.
    std::vector<std::string> action_schema() const;
    bool is_valid_action(const std::string& action) const;

    /// Pre-action observation (does not advance the step counter).
    EnvStep observe() const;

    /// Execute one action. Unknown actions come back as invalid-action
    /// feedback, never an exception.
    EnvStep step(const std::string& action);

    /// True iff the agent stands on the target with the required tool
    /// selected (or no tool is required).
    bool evaluate_success() const;

    /// Queue a scripted event. Throws std::invalid_argument when
    /// at_step is in the past or the same (kind, step) already exists.
    void inject_event(EventKind kind, int at_step, int duration = 1);

    bool stall_active(int step) const;
    bool trap_active(int step) const;

    /// 8x8 / 12x12 / 20x20 grids map to easy / medium / hard; sizes in
    /// between take the nearest cap at or above.
    Difficulty difficulty() const;

private:
    GridWorld() = default;

    bool event_at(int step, EventKind kind) const;
    Frame render() const;
    std::string describe() const;

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> walls_;  // row-major, 1 = wall
    int agent_x_ = 0;
    int agent_y_ = 0;
    Facing facing_ = Facing::right;
    int target_x_ = 0;
    int target_y_ = 0;
    std::string required_tool_;
    std::string selected_tool_;
    std::vector<std::string> tools_;
    std::vector<ScriptedEvent> events_;
    int rng_seed_ = 42;
    int step_index_ = 0;
    int palette_ = 0;
};

}  // namespace spur
