#include "lapode/core.hpp"
#include "lapode/expm.hpp"
#include "lapode/integrators.hpp"

#include <array>
#include <cctype>
#include <utility>

namespace lapode {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Dimension: return "dimension";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Structure: return "structure";
        case ErrorKind::StabilityRegion: return "stability-region";
        case ErrorKind::Solve: return "solve";
        case ErrorKind::Schema: return "schema";
        case ErrorKind::Io: return "io";
        case ErrorKind::Usage: return "usage";
    }
    return "unknown";
}

const char* to_string(ExpMode mode) noexcept {
    return mode == ExpMode::Accurate ? "accurate" : "pade2";
}

ExpMode parse_exp_mode(const std::string& name) {
    if (name == "accurate") {
        return ExpMode::Accurate;
    }
    if (name == "pade2" || name == "pade") {
        return ExpMode::PadePositive;
    }
    fail(ErrorKind::Usage, "unknown exponential mode '" + name + "' (expected accurate or pade2)");
}

namespace {

constexpr std::array<std::pair<MethodId, const char*>, 12> kMethodNames{{
    {MethodId::EM1, "em1"},
    {MethodId::EM2_MID, "em2-mid"},
    {MethodId::EM2_TRAP, "em2-trap"},
    {MethodId::EM2_MID_CHEAP, "em2-mid-cheap"},
    {MethodId::EM2_TRAP_CHEAP, "em2-trap-cheap"},
    {MethodId::ES2, "es2"},
    {MethodId::EM3, "em3"},
    {MethodId::MPE, "mpe"},
    {MethodId::MPRK2, "mprk2"},
    {MethodId::EULER, "euler"},
    {MethodId::RK4, "rk4"},
    {MethodId::ROS4, "ros4"},
}};

}  // namespace

const char* to_string(MethodId id) noexcept {
    for (const auto& [m, name] : kMethodNames) {
        if (m == id) {
            return name;
        }
    }
    return "unknown";
}

MethodId parse_method(const std::string& name) {
    std::string key;
    for (char c : name) {
        key += c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (key == "em2") {
        return MethodId::EM2_MID;
    }
    for (const auto& [m, n] : kMethodNames) {
        if (key == n) {
            return m;
        }
    }
    fail(ErrorKind::Usage, "unknown method '" + name + "'");
}

const std::vector<MethodId>& all_methods() {
    static const std::vector<MethodId> methods = [] {
        std::vector<MethodId> v;
        for (const auto& entry : kMethodNames) {
            v.push_back(entry.first);
        }
        return v;
    }();
    return methods;
}

int exponentials_per_step(MethodId id) noexcept {
    switch (id) {
        case MethodId::EM1: return 1;
        case MethodId::EM2_MID:
        case MethodId::EM2_TRAP: return 2;
        case MethodId::EM2_MID_CHEAP:
        case MethodId::EM2_TRAP_CHEAP: return 1;
        case MethodId::ES2: return 3;
        case MethodId::EM3: return 7;
        default: return 0;
    }
}

int nominal_order(MethodId id) noexcept {
    switch (id) {
        case MethodId::EM1:
        case MethodId::MPE:
        case MethodId::EULER: return 1;
        case MethodId::EM3: return 3;
        case MethodId::RK4:
        case MethodId::ROS4: return 4;
        default: return 2;
    }
}

bool is_unconditionally_positive(MethodId id) noexcept {
    switch (id) {
        case MethodId::EM3:
        case MethodId::EULER:
        case MethodId::RK4:
        case MethodId::ROS4: return false;
        default: return true;
    }
}

bool uses_exponentials(MethodId id) noexcept { return exponentials_per_step(id) > 0; }

}  // namespace lapode
