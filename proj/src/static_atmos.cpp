#include "qkd/channel_loss.hpp"
#include "static_atmos_data.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace qkd {

Weather weather_from_string(const std::string& s)
{
    if (s == "clear")
        return Weather::clear;
    if (s == "light_rain")
        return Weather::light_rain;
    if (s == "moderate_rain")
        return Weather::moderate_rain;
    throw std::invalid_argument("unknown weather '" + s + "'");
}

StaticAtmosTable StaticAtmosTable::parse(const std::string& text)
{
    StaticAtmosTable t;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key))
            continue;
        if (key == "version") {
            ls >> t.version;
            continue;
        }
        std::string weather;
        StaticAtmosEntry e;
        e.key = key;
        if (!(ls >> weather >> e.zenith_deg >> e.db))
            throw std::runtime_error("static atmosphere table: bad line " + std::to_string(lineno));
        e.weather = weather_from_string(weather);
        std::getline(ls >> std::ws, e.source);
        e.source.erase(e.source.find_last_not_of(" \t\r") + 1);
        t.entries_.push_back(e);
    }
    return t;
}

StaticAtmosTable StaticAtmosTable::load(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot open static atmosphere table " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

const StaticAtmosTable& StaticAtmosTable::builtin()
{
    static const StaticAtmosTable table = [] {
        if (const char* p = std::getenv("QKD_STATIC_ATMOS"))
            return load(p);
        return parse(kStaticAtmosText);
    }();
    return table;
}

const StaticAtmosEntry& StaticAtmosTable::lookup(const std::string& key, Weather w,
                                                 double zenith_deg) const
{
    const StaticAtmosEntry* best = nullptr;
    for (const auto& e : entries_) {
        if (e.key != key || e.weather != w)
            continue;
        if (!best || std::fabs(e.zenith_deg - zenith_deg) < std::fabs(best->zenith_deg - zenith_deg))
            best = &e;
    }
    if (!best)
        throw std::out_of_range("no FASCODE data for (" + key + ", " + to_string(w) + ")");
    return *best;
}

} // namespace qkd
