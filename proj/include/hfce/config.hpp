#ifndef HFCE_CONFIG_HPP
#define HFCE_CONFIG_HPP

#include <map>
#include <string>
#include <vector>

namespace hfce {

/// Flat key = value configuration with [section] headers and '#' comments.
/// Keys are addressed as "section.key"; keys before any section header have
/// no prefix.
class Config {
public:
    static Config parse(const std::string& text);
    static Config parse_file(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    void merge(const Config& other);

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<std::string> get_names(const std::string& key,
                                       const std::vector<std::string>& fallback) const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace hfce

#endif
