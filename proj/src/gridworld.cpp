#include "spur/gridworld.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace spur {

namespace {

constexpr int kCellPixels = 8;

// Figure colors per palette. Free cells get a position-dependent shade
// (below) so every frame carries structure beyond the three sprites: a
// one-cell agent move then perturbs only a small fraction of the frame
// while a palette swap rewrites all of it, which is the separation the
// visual-change threshold relies on.
struct Palette {
    std::uint8_t wall;
    std::uint8_t target;
    std::uint8_t agent;
};

constexpr Palette kPalettes[2] = {
    {32, 224, 16},
    {240, 48, 208},
};

std::uint8_t cell_shade(int palette, int x, int y) {
    if (palette == 0) {
        return static_cast<std::uint8_t>(64 + 16 * ((x * 5 + y * 3) % 9));
    }
    return static_cast<std::uint8_t>(224 - 16 * ((x * 3 + y * 5) % 9));
}

constexpr std::string_view kSelectPrefix = "select_tool ";

}  // namespace

std::string event_kind_name(EventKind kind) {
    switch (kind) {
        case EventKind::scene_change: return "scene_change";
        case EventKind::stall_zone: return "stall_zone";
        case EventKind::repetition_trap: return "repetition_trap";
        case EventKind::hard_failure: return "hard_failure";
    }
    throw std::invalid_argument("event_kind_name: bad enum value");
}

EventKind parse_event_kind(const std::string& name) {
    if (name == "scene_change") return EventKind::scene_change;
    if (name == "stall_zone") return EventKind::stall_zone;
    if (name == "repetition_trap") return EventKind::repetition_trap;
    if (name == "hard_failure") return EventKind::hard_failure;
    throw std::invalid_argument("parse_event_kind: unknown kind '" + name + "'");
}

std::string facing_name(Facing f) {
    switch (f) {
        case Facing::up: return "up";
        case Facing::down: return "down";
        case Facing::left: return "left";
        case Facing::right: return "right";
    }
    throw std::invalid_argument("facing_name: bad enum value");
}

Facing parse_facing(const std::string& name) {
    if (name == "up") return Facing::up;
    if (name == "down") return Facing::down;
    if (name == "left") return Facing::left;
    if (name == "right") return Facing::right;
    throw std::invalid_argument("parse_facing: unknown facing '" + name + "'");
}

Scenario load_scenario(const std::string& path) {
    std::ifstream file(path);
    if (!file) {
        throw std::invalid_argument("load_scenario: cannot open " + path);
    }
    nlohmann::json j = nlohmann::json::parse(file, nullptr, false);
    if (j.is_discarded()) {
        throw std::invalid_argument("load_scenario: bad JSON in " + path);
    }

    Scenario s;
    s.name = j.value("name", std::string());
    s.width = j.at("width").get<int>();
    s.height = j.at("height").get<int>();
    for (const auto& wall : j.value("walls", nlohmann::json::array())) {
        s.walls.emplace_back(wall.at(0).get<int>(), wall.at(1).get<int>());
    }
    const auto& agent = j.at("agent");
    s.agent_x = agent.at("x").get<int>();
    s.agent_y = agent.at("y").get<int>();
    s.agent_facing = parse_facing(agent.value("facing", std::string("right")));
    const auto& target = j.at("target");
    s.target_x = target.at("x").get<int>();
    s.target_y = target.at("y").get<int>();
    s.required_tool = j.value("required_tool", std::string());
    s.tools = j.value("tools", std::vector<std::string>{});
    for (const auto& ev : j.value("events", nlohmann::json::array())) {
        ScriptedEvent event;
        event.step = ev.at("step").get<int>();
        event.kind = parse_event_kind(ev.at("kind").get<std::string>());
        event.duration = ev.value("duration", 1);
        s.events.push_back(event);
    }
    s.rng_seed = j.value("rng_seed", 42);
    return s;
}

void save_scenario(const Scenario& scenario, const std::string& path) {
    nlohmann::json j;
    j["name"] = scenario.name;
    j["width"] = scenario.width;
    j["height"] = scenario.height;
    nlohmann::json walls = nlohmann::json::array();
    for (const auto& [x, y] : scenario.walls) walls.push_back({x, y});
    j["walls"] = walls;
    j["agent"] = {{"x", scenario.agent_x},
                  {"y", scenario.agent_y},
                  {"facing", facing_name(scenario.agent_facing)}};
    j["target"] = {{"x", scenario.target_x}, {"y", scenario.target_y}};
    j["required_tool"] = scenario.required_tool;
    j["tools"] = scenario.tools;
    nlohmann::json events = nlohmann::json::array();
    for (const auto& ev : scenario.events) {
        events.push_back({{"step", ev.step},
                          {"kind", event_kind_name(ev.kind)},
                          {"duration", ev.duration}});
    }
    j["events"] = events;
    j["rng_seed"] = scenario.rng_seed;

    std::ofstream file(path);
    if (!file) {
        throw std::invalid_argument("save_scenario: cannot open " + path);
    }
    file << j.dump(2) << '\n';
}

GridWorld GridWorld::from_scenario(const Scenario& scenario) {
    if (scenario.width <= 0 || scenario.height <= 0) {
        throw std::invalid_argument("GridWorld: non-positive grid size");
    }
    GridWorld world;
    world.width_ = scenario.width;
    world.height_ = scenario.height;
    world.walls_.assign(static_cast<std::size_t>(scenario.width * scenario.height), 0);
    for (const auto& [x, y] : scenario.walls) {
        if (!world.in_bounds(x, y)) {
            throw std::invalid_argument("GridWorld: wall out of bounds");
        }
        world.walls_[static_cast<std::size_t>(y * scenario.width + x)] = 1;
    }
    world.agent_x_ = scenario.agent_x;
    world.agent_y_ = scenario.agent_y;
    world.facing_ = scenario.agent_facing;
    world.target_x_ = scenario.target_x;
    world.target_y_ = scenario.target_y;
    if (!world.in_bounds(world.agent_x_, world.agent_y_) ||
        world.is_wall(world.agent_x_, world.agent_y_)) {
        throw std::invalid_argument("GridWorld: agent not on a free cell");
    }
    if (!world.in_bounds(world.target_x_, world.target_y_) ||
        world.is_wall(world.target_x_, world.target_y_)) {
        throw std::invalid_argument("GridWorld: target not on a free cell");
    }
    world.required_tool_ = scenario.required_tool;
    world.tools_ = scenario.tools;
    if (!world.required_tool_.empty() &&
        std::find(world.tools_.begin(), world.tools_.end(), world.required_tool_) ==
            world.tools_.end()) {
        throw std::invalid_argument("GridWorld: required tool not in tool set");
    }
    world.rng_seed_ = scenario.rng_seed;
    for (const auto& ev : scenario.events) {
        world.inject_event(ev.kind, ev.step, ev.duration);
    }
    return world;
}

bool GridWorld::in_bounds(int x, int y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
}

bool GridWorld::is_wall(int x, int y) const {
    return walls_[static_cast<std::size_t>(y * width_ + x)] != 0;
}

std::vector<std::string> GridWorld::action_schema() const {
    std::vector<std::string> actions = {"move_up", "move_down", "move_left",
                                        "move_right", "use", "wait"};
    for (const auto& tool : tools_) {
        actions.push_back(std::string(kSelectPrefix) + tool);
    }
    return actions;
}

bool GridWorld::is_valid_action(const std::string& action) const {
    if (action == "move_up" || action == "move_down" || action == "move_left" ||
        action == "move_right" || action == "use" || action == "wait") {
        return true;
    }
    if (action.rfind(kSelectPrefix, 0) == 0) {
        std::string tool = action.substr(kSelectPrefix.size());
        return std::find(tools_.begin(), tools_.end(), tool) != tools_.end();
    }
    return false;
}

bool GridWorld::event_at(int step, EventKind kind) const {
    for (const auto& ev : events_) {
        if (ev.step == step && ev.kind == kind) return true;
    }
    return false;
}

bool GridWorld::stall_active(int step) const {
    for (const auto& ev : events_) {
        if (ev.kind == EventKind::stall_zone && step >= ev.step &&
            step < ev.step + ev.duration) {
            return true;
        }
    }
    return false;
}

bool GridWorld::trap_active(int step) const {
    for (const auto& ev : events_) {
        if (ev.kind == EventKind::repetition_trap && step >= ev.step &&
            step < ev.step + ev.duration) {
            return true;
        }
    }
    return false;
}

EnvStep GridWorld::observe() const {
    EnvStep out;
    out.frame = render();
    out.ui_text = describe();
    return out;
}

EnvStep GridWorld::step(const std::string& action) {
    step_index_ += 1;
    RunnerFeedback fb;

    if (event_at(step_index_, EventKind::scene_change)) {
        palette_ ^= 1;
        fb.structured_message = "scene changed";
    }

    if (event_at(step_index_, EventKind::hard_failure)) {
        fb.execution_error = true;
        fb.structured_message = "execution error: actuator fault";
    } else if (action == "move_up" || action == "move_down" || action == "move_left" ||
               action == "move_right") {
        if (trap_active(step_index_)) {
            // Trapped movement: the command is accepted but nothing
            // happens, and the runner reports no error.
        } else {
            int nx = agent_x_;
            int ny = agent_y_;
            Facing nf = facing_;
            if (action == "move_up") { ny -= 1; nf = Facing::up; }
            if (action == "move_down") { ny += 1; nf = Facing::down; }
            if (action == "move_left") { nx -= 1; nf = Facing::left; }
            if (action == "move_right") { nx += 1; nf = Facing::right; }
            if (in_bounds(nx, ny) && !is_wall(nx, ny)) {
                agent_x_ = nx;
                agent_y_ = ny;
                facing_ = nf;
                fb.position_or_facing_changed = true;
            } else {
                fb.invalid_action = true;
            }
        }
    } else if (action.rfind(kSelectPrefix, 0) == 0) {
        std::string tool = action.substr(kSelectPrefix.size());
        if (std::find(tools_.begin(), tools_.end(), tool) != tools_.end()) {
            if (tool != selected_tool_) {
                selected_tool_ = tool;
                fb.selected_item_changed = true;
                fb.menu_or_dialogue_transition = true;
            }
        } else {
            fb.invalid_action = true;
        }
    } else if (action == "use") {
        if (evaluate_success()) {
            fb.productive_execution_confirmed = true;
        } else {
            fb.invalid_action = true;
        }
    } else if (action == "wait") {
        // deliberate no-op
    } else {
        fb.invalid_action = true;
    }

    if (evaluate_success()) {
        fb.task_or_subgoal_completed = true;
    }

    if (stall_active(step_index_)) {
        fb.task_or_subgoal_completed = false;
        fb.position_or_facing_changed = false;
        fb.selected_item_changed = false;
        fb.inventory_delta = false;
        fb.menu_or_dialogue_transition = false;
        fb.productive_execution_confirmed = false;
        if (fb.structured_message.empty()) fb.structured_message = "no visible progress";
    }

    EnvStep out;
    out.frame = render();
    out.ui_text = describe();
    out.feedback = fb;
    return out;
}

bool GridWorld::evaluate_success() const {
    bool on_target = agent_x_ == target_x_ && agent_y_ == target_y_;
    bool tool_ok = required_tool_.empty() || selected_tool_ == required_tool_;
    return on_target && tool_ok;
}

void GridWorld::inject_event(EventKind kind, int at_step, int duration) {
    if (at_step < step_index_) {
        throw std::invalid_argument("inject_event: step " + std::to_string(at_step) +
                                    " is in the past");
    }
    if (duration < 1) {
        throw std::invalid_argument("inject_event: duration must be >= 1");
    }
    for (const auto& ev : events_) {
        if (ev.step == at_step && ev.kind == kind) {
            throw std::invalid_argument("inject_event: duplicate " + event_kind_name(kind) +
                                        " at step " + std::to_string(at_step));
        }
    }
    ScriptedEvent event{at_step, kind, duration};
    auto pos = std::upper_bound(events_.begin(), events_.end(), event,
                                [](const ScriptedEvent& a, const ScriptedEvent& b) {
                                    return a.step < b.step;
                                });
    events_.insert(pos, event);
}

Difficulty GridWorld::difficulty() const {
    int size = std::max(width_, height_);
    if (size <= 8) return Difficulty::easy;
    if (size <= 12) return Difficulty::medium;
    return Difficulty::hard;
}

Frame GridWorld::render() const {
    const Palette& pal = kPalettes[palette_];
    Frame frame;
    frame.width = width_ * kCellPixels;
    frame.height = height_ * kCellPixels;
    frame.channels = 1;
    frame.pixels.resize(static_cast<std::size_t>(frame.width) * frame.height);
    for (int cy = 0; cy < height_; ++cy) {
        for (int cx = 0; cx < width_; ++cx) {
            std::uint8_t color = is_wall(cx, cy) ? pal.wall : cell_shade(palette_, cx, cy);
            if (cx == target_x_ && cy == target_y_) color = pal.target;
            if (cx == agent_x_ && cy == agent_y_) color = pal.agent;
            for (int py = 0; py < kCellPixels; ++py) {
                int row = cy * kCellPixels + py;
                std::uint8_t* dst =
                    frame.pixels.data() + static_cast<std::size_t>(row) * frame.width +
                    static_cast<std::size_t>(cx) * kCellPixels;
                std::fill(dst, dst + kCellPixels, color);
            }
        }
    }
    return frame;
}

std::string GridWorld::describe() const {
    std::ostringstream text;
    text << "scene " << palette_ << " agent " << agent_x_ << " " << agent_y_ << " facing "
         << facing_name(facing_) << " target " << target_x_ << " " << target_y_;
    text << " tool " << (selected_tool_.empty() ? "none" : selected_tool_);
    if (!required_tool_.empty()) text << " needs " << required_tool_;
    return text.str();
}

}  // namespace spur
