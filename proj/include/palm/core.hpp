#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace palm {

// Attribute values are integers, booleans, or enum tags.
using Value = std::variant<int, bool, std::string>;

std::string value_to_string(const Value& v);
bool value_less(const Value& a, const Value& b);

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Factored object-attribute state. Objects and attributes are kept sorted
// so canonical serialization is insertion-order independent.
class GroundState {
public:
    struct Object {
        std::string id;
        std::vector<std::pair<std::string, Value>> attrs;  // sorted by name
        bool operator==(const Object&) const = default;
    };

    void set(const std::string& obj, const std::string& attr, Value v);
    const Value& get(const std::string& obj, const std::string& attr) const;
    int get_int(const std::string& obj, const std::string& attr) const;
    bool get_bool(const std::string& obj, const std::string& attr) const;
    const std::string& get_str(const std::string& obj, const std::string& attr) const;
    bool has_object(const std::string& obj) const;

    const std::vector<Object>& objects() const { return objects_; }

    bool operator==(const GroundState& o) const { return objects_ == o.objects_; }

private:
    Object* find_or_create(const std::string& obj);
    const Object* find(const std::string& obj) const;
    std::vector<Object> objects_;  // sorted by id
};

// Deterministic, injective serialization of a state.
std::string canonical_key(const GroundState& s);

enum class Terminal { none, goal, fail };

struct StepOutcome {
    GroundState next_state;
    double reward = 0.0;
    Terminal terminal = Terminal::none;
};

struct Action {
    enum class Kind { primitive, abstract_reference };
    std::string id;
    Kind kind = Kind::primitive;
};

// Splittable deterministic random source. Not std::uniform_* based:
// output must be identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    std::uint64_t next_u64();
    double next_double();                 // [0, 1)
    int next_int(int bound);              // [0, bound)
    Rng split(std::uint64_t stream) const;

private:
    std::uint64_t state_;
    std::uint64_t inc_;
};

// One-step stepping contract shared by domains. Environments are immutable;
// all randomness flows through the Rng argument.
class Environment {
public:
    virtual ~Environment() = default;
    virtual std::string domain_name() const = 0;
    virtual const std::vector<Action>& primitive_actions() const = 0;
    virtual GroundState initial_state() const = 0;
    virtual Terminal terminal_status(const GroundState& s) const = 0;
    // Declared outcome distribution of (s, a); probabilities sum to 1.
    virtual std::vector<std::pair<double, StepOutcome>> outcomes(
        const GroundState& s, const std::string& action_id) const = 0;
    // Values available for a subtask parameter kind (depot, block, cell, ...).
    virtual std::vector<std::string> param_domain(const std::string& kind) const = 0;

    StepOutcome step(const GroundState& s, const std::string& action_id, Rng& rng) const;
    bool has_action(const std::string& action_id) const;
};

struct TaskSpec {
    std::string name;       // taxi-classic, cleanup-small, ...
    double discount = 0.95;
    std::uint64_t seed = 0;
};

// Instantiates a named task variant; the rng draws the concrete instance
// (start positions, goals).
struct TaskInstance {
    std::shared_ptr<const Environment> env;
    GroundState start;
};
TaskInstance make_task(const std::string& variant, Rng& rng);
bool is_deterministic_variant(const std::string& variant);

}  // namespace palm
