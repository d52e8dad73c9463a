#include <algorithm>
#include <array>
#include <cmath>

#include "common.hpp"
#include "threatbench/core/error.hpp"

namespace threatbench::synth {
namespace {

const std::array<const char*, 4> kActivities{"login", "file_access", "command", "privilege_use"};
const std::array<double, 4> kBaseActivityWeights{0.15, 0.45, 0.30, 0.10};

struct Event {
    int hour = 0;
    int activity = 0;
    double failed = 0, commands = 0, sensitive = 0, admin = 0;
    int anomaly = 0;
    std::string pattern;
    std::size_t counter = 0; ///< generation order within the user-day
};

UserProfile make_profile(int user_id, RngStream rng) {
    UserProfile p;
    p.user_id = user_id;
    p.work_start = static_cast<int>(rng.uniform_int(24));
    p.work_length = static_cast<int>(rng.uniform_int(8, 10));
    p.command_mean = rng.uniform(2.0, 10.0);
    for (double w : kBaseActivityWeights) {
        p.activity_weights.push_back(w * rng.uniform(0.7, 1.3));
    }
    return p;
}

Event clean_event(const UserProfile& p, RngStream& rng) {
    Event e;
    e.hour = (p.work_start + static_cast<int>(rng.uniform_int(p.work_length))) % 24;
    e.activity = static_cast<int>(rng.categorical(p.activity_weights));
    switch (e.activity) {
    case 0:
        e.failed = static_cast<double>(rng.categorical({0.85, 0.10, 0.05}));
        break;
    case 1:
        e.sensitive = rng.bernoulli(0.02) ? 1 : 0;
        break;
    case 2:
        e.commands = static_cast<double>(rng.poisson(p.command_mean));
        break;
    default:
        e.commands = static_cast<double>(rng.poisson(1.0));
        e.admin = rng.bernoulli(0.3) ? 1 : 0;
        break;
    }
    return e;
}

int off_hour(const UserProfile& p, RngStream& rng) {
    const int gap = 24 - p.work_length;
    return (p.work_start + p.work_length + static_cast<int>(rng.uniform_int(gap))) % 24;
}

void inject(Event& e, const UserProfile& p, int pattern, RngStream& rng) {
    const auto counter = e.counter;
    e = Event{};
    e.hour = off_hour(p, rng);
    e.counter = counter;
    e.anomaly = 1;
    switch (pattern) {
    case 0:
        e.activity = 0;
        e.failed = static_cast<double>(rng.uniform_int(5, 15));
        e.pattern = "failed_login_spike";
        break;
    case 1:
        e.activity = 2;
        e.commands = static_cast<double>(rng.uniform_int(40, 80));
        e.sensitive = 1;
        e.pattern = "late_night_query";
        break;
    default:
        e.activity = 1;
        e.commands = static_cast<double>(rng.uniform_int(10, 30));
        e.sensitive = 1;
        e.admin = 1;
        e.pattern = "risky_transfer";
        break;
    }
}

void sort_session(std::vector<Event>& events) {
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        return a.hour != b.hour ? a.hour < b.hour : a.counter < b.counter;
    });
}

} // namespace

bool UserProfile::in_baseline(int hour) const {
    const int offset = ((hour - work_start) % 24 + 24) % 24;
    return offset < work_length;
}

UserActivity generate_user_activity(const GeneratorConfig& config) {
    const auto& u = config.ueba;
    if (u.users <= 0 || u.days <= 0) {
        throw ConfigError("generate_user_activity: users and days must be positive");
    }
    if (!(u.events_per_day > 0.0)) {
        throw ConfigError("generate_user_activity: events_per_day must be positive");
    }
    if (u.anomalies_per_session < 1) {
        throw ConfigError("generate_user_activity: anomalies_per_session must be positive");
    }
    if (!(config.anomaly_rate > 0.0 && config.anomaly_rate < 0.5)) {
        throw ConfigError("generate_user_activity: anomaly_rate must lie in (0, 0.5)");
    }
    const RngStream root(config.seed, "ueba");

    UserActivity out;
    std::vector<std::vector<Event>> sessions; // (user, day) in order
    std::vector<std::size_t> session_user;
    std::vector<int> session_day;
    std::size_t total = 0;
    for (int user = 1; user <= u.users; ++user) {
        const auto user_rng = root.child("user", static_cast<std::uint64_t>(user));
        out.profiles.push_back(make_profile(user, user_rng.child("profile")));
        const auto& profile = out.profiles.back();
        for (int day = 1; day <= u.days; ++day) {
            auto rng = user_rng.child("day", static_cast<std::uint64_t>(day));
            const auto count = rng.poisson(u.events_per_day);
            std::vector<Event> events;
            for (std::size_t k = 0; k < count; ++k) {
                events.push_back(clean_event(profile, rng));
                events.back().counter = k;
            }
            sort_session(events);
            total += events.size();
            sessions.push_back(std::move(events));
            session_user.push_back(static_cast<std::size_t>(user - 1));
            session_day.push_back(day);
        }
    }

    // Exactly round(total * rate) events become anomalous, grouped a few per session.
    std::size_t remaining = exact_anomaly_count(total, config.anomaly_rate);
    auto pick_rng = root.child("anomaly-sessions");
    std::vector<std::size_t> order(sessions.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    pick_rng.shuffle(order);
    for (std::size_t s : order) {
        if (remaining == 0) break;
        auto& events = sessions[s];
        if (events.empty()) continue;
        auto rng = root.child("inject", s);
        const auto take = std::min({static_cast<std::size_t>(u.anomalies_per_session), remaining,
                                    events.size()});
        const int pattern = static_cast<int>(rng.uniform_int(3));
        const auto& profile = out.profiles[session_user[s]];
        for (auto pos : rng.sample_without_replacement(events.size(), take)) {
            inject(events[pos], profile, pattern, rng);
        }
        sort_session(events);
        remaining -= take;
    }
    if (remaining != 0) {
        throw DataError("generate_user_activity: not enough events to place anomalies");
    }

    std::vector<double> user_col, day_col, hour, weekday, failed, commands, sensitive, admin, label;
    std::vector<std::string> activity;
    for (std::size_t s = 0; s < sessions.size(); ++s) {
        for (const auto& e : sessions[s]) {
            user_col.push_back(static_cast<double>(session_user[s] + 1));
            day_col.push_back(session_day[s]);
            hour.push_back(e.hour);
            weekday.push_back((session_day[s] - 1) % 7);
            activity.emplace_back(kActivities[static_cast<std::size_t>(e.activity)]);
            failed.push_back(e.failed);
            commands.push_back(e.commands);
            sensitive.push_back(e.sensitive);
            admin.push_back(e.admin);
            label.push_back(e.anomaly);
            out.pattern.push_back(e.pattern);
        }
    }
    auto& d = out.events;
    d.add_numeric({"user_id", ColumnKind::numeric}, std::move(user_col));
    d.add_numeric({"day", ColumnKind::numeric}, std::move(day_col));
    d.add_numeric({"hour", ColumnKind::numeric}, std::move(hour));
    d.add_numeric({"weekday", ColumnKind::numeric}, std::move(weekday));
    d.add_categorical("activity_type", std::move(activity));
    d.add_numeric({"failed_login_attempts", ColumnKind::numeric}, std::move(failed));
    d.add_numeric({"command_count", ColumnKind::numeric}, std::move(commands));
    d.add_numeric({"accessed_sensitive_file", ColumnKind::binary}, std::move(sensitive));
    d.add_numeric({"is_admin_action", ColumnKind::binary}, std::move(admin));
    d.add_numeric({"anomaly_label", ColumnKind::label}, std::move(label));
    return out;
}

} // namespace threatbench::synth
