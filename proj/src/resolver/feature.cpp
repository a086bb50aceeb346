#include "weakres/resolver/feature.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "weakres/error.hpp"
#include "weakres/stl/monitor.hpp"

namespace weakres::resolver {

namespace {

std::string trim(std::string_view s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos)
        return {};
    std::size_t b = s.find_last_not_of(" \t\r");
    return std::string(s.substr(a, b - a + 1));
}

// Re-anchor an error raised while parsing a value to the file position.
[[noreturn]] void rethrow_at(const ParseError& e, int line, int value_column) {
    int col = e.line() == 1 ? value_column + e.column() - 1 : e.column();
    throw ParseError(e.message(), line + e.line() - 1, col);
}

} // namespace

FeatureSpec parse_feature(std::string_view text) {
    struct Entry {
        std::string value;
        int line;
        int column;
    };
    std::map<std::string, Entry> entries;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::size_t hash = raw.find('#');
        std::string body = raw.substr(0, hash);
        if (trim(body).empty())
            continue;
        std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value'", line, 1);
        std::string key = trim(body.substr(0, eq));
        static const char* known[] = {"id", "requirement", "activation", "action_space"};
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
            throw ParseError("unknown key '" + key + "'", line, static_cast<int>(body.find_first_not_of(" \t")) + 1);
        if (entries.count(key))
            throw ParseError("duplicate key '" + key + "'", line, 1);
        std::size_t vstart = body.find_first_not_of(" \t", eq + 1);
        if (vstart == std::string::npos)
            throw ParseError("missing value for '" + key + "'", line, static_cast<int>(eq) + 2);
        entries[key] = {trim(body.substr(vstart)), line, static_cast<int>(vstart) + 1};
    }
    for (const char* key : {"id", "requirement", "action_space"})
        if (!entries.count(key))
            throw ParseError(std::string("missing key '") + key + "'", line + 1, 1);

    FeatureSpec f;
    f.id = entries["id"].value;
    f.action_space = entries["action_space"].value;
    const auto& req = entries["requirement"];
    try {
        f.requirement = weak::parse_weakstl(req.value);
    } catch (const ParseError& e) {
        rethrow_at(e, req.line, req.column);
    } catch (const InvalidInput& e) {
        throw ParseError(e.what(), req.line, req.column);
    }
    if (auto it = entries.find("activation"); it != entries.end()) {
        try {
            f.activation = stl::parse_stl(it->second.value);
        } catch (const ParseError& e) {
            rethrow_at(e, it->second.line, it->second.column);
        }
        if (stl::horizon(f.activation) != 0)
            throw ParseError("activation must not look ahead", it->second.line, it->second.column);
    }
    return f;
}

FeatureSpec parse_feature_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InvalidInput("cannot open feature file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_feature(buf.str());
}

std::string print_feature(const FeatureSpec& f) {
    return "id = " + f.id + "\nrequirement = " + weak::to_string(f.requirement) +
           "\nactivation = " + stl::to_string(f.activation) + "\naction_space = " + f.action_space + "\n";
}

bool is_active(const FeatureSpec& f, const stl::Signal& s) {
    return stl::satisfied(f.activation, s, s.last_step());
}

void check_against(const FeatureSpec& f, const env::TransitionSystem& model) {
    auto known = model.signal_variables();
    auto check = [&](const stl::Node& n, const char* what) {
        for (const auto& v : stl::variables(n))
            if (std::find(known.begin(), known.end(), v) == known.end())
                throw InvalidInput("feature '" + f.id + "': " + what + " uses '" + v +
                                   "', which the model does not define");
    };
    check(f.requirement.root(), "requirement");
    check(f.activation.root(), "activation");
}

} // namespace weakres::resolver
