#include "palm/core.hpp"

#include <algorithm>

namespace palm {

std::string value_to_string(const Value& v) {
    if (std::holds_alternative<int>(v)) return std::to_string(std::get<int>(v));
    if (std::holds_alternative<bool>(v)) return std::get<bool>(v) ? "true" : "false";
    return std::get<std::string>(v);
}

bool value_less(const Value& a, const Value& b) {
    if (a.index() != b.index()) return a.index() < b.index();
    return a < b;
}

GroundState::Object* GroundState::find_or_create(const std::string& obj) {
    auto it = std::lower_bound(objects_.begin(), objects_.end(), obj,
                               [](const Object& o, const std::string& id) { return o.id < id; });
    if (it == objects_.end() || it->id != obj) it = objects_.insert(it, Object{obj, {}});
    return &*it;
}

const GroundState::Object* GroundState::find(const std::string& obj) const {
    auto it = std::lower_bound(objects_.begin(), objects_.end(), obj,
                               [](const Object& o, const std::string& id) { return o.id < id; });
    if (it == objects_.end() || it->id != obj) return nullptr;
    return &*it;
}

void GroundState::set(const std::string& obj, const std::string& attr, Value v) {
    Object* o = find_or_create(obj);
    auto it = std::lower_bound(o->attrs.begin(), o->attrs.end(), attr,
                               [](const auto& p, const std::string& a) { return p.first < a; });
    if (it == o->attrs.end() || it->first != attr) {
        o->attrs.insert(it, {attr, std::move(v)});
    } else {
        it->second = std::move(v);
    }
}

const Value& GroundState::get(const std::string& obj, const std::string& attr) const {
    const Object* o = find(obj);
    if (o == nullptr) throw DomainError("no such object: " + obj);
    auto it = std::lower_bound(o->attrs.begin(), o->attrs.end(), attr,
                               [](const auto& p, const std::string& a) { return p.first < a; });
    if (it == o->attrs.end() || it->first != attr)
        throw DomainError("no attribute " + attr + " on " + obj);
    return it->second;
}

int GroundState::get_int(const std::string& obj, const std::string& attr) const {
    return std::get<int>(get(obj, attr));
}
bool GroundState::get_bool(const std::string& obj, const std::string& attr) const {
    return std::get<bool>(get(obj, attr));
}
const std::string& GroundState::get_str(const std::string& obj, const std::string& attr) const {
    return std::get<std::string>(get(obj, attr));
}
bool GroundState::has_object(const std::string& obj) const { return find(obj) != nullptr; }

std::string canonical_key(const GroundState& s) {
    std::string out;
    out.reserve(128);
    for (const auto& o : s.objects()) {
        out += o.id;
        out += '{';
        for (const auto& [name, v] : o.attrs) {
            out += name;
            out += '=';
            out += value_to_string(v);
            out += ',';
        }
        out += '}';
    }
    return out;
}

// -------- Rng (PCG-XSH-RR 64/32 pair folded to 64 bits) --------

namespace {
std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    state_ = splitmix64(s);
    inc_ = splitmix64(s) | 1ull;
}

std::uint64_t Rng::next_u64() {
    state_ = state_ * 6364136223846793005ull + inc_;
    std::uint64_t z = state_;
    z = (z ^ (z >> 33)) * 0xFF51AFD7ED558CCDull;
    z = (z ^ (z >> 33)) * 0xC4CEB9FE1A85EC53ull;
    return z ^ (z >> 33);
}

double Rng::next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

int Rng::next_int(int bound) {
    if (bound <= 0) throw std::invalid_argument("next_int bound must be positive");
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(bound));
}

Rng Rng::split(std::uint64_t stream) const {
    std::uint64_t s = state_ ^ (0xA0761D6478BD642Full * (stream + 1));
    return Rng(s);
}

// -------- Environment --------

StepOutcome Environment::step(const GroundState& s, const std::string& action_id, Rng& rng) const {
    if (!has_action(action_id)) throw DomainError("invalid action: " + action_id);
    auto branches = outcomes(s, action_id);
    if (branches.size() == 1) return std::move(branches[0].second);
    double u = rng.next_double();
    double acc = 0.0;
    for (auto& [p, out] : branches) {
        acc += p;
        if (u < acc) return std::move(out);
    }
    return std::move(branches.back().second);
}

bool Environment::has_action(const std::string& action_id) const {
    for (const auto& a : primitive_actions())
        if (a.id == action_id) return true;
    return false;
}

}  // namespace palm
