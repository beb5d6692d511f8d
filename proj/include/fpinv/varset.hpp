// Interned variable names. A VarTable owns the id space for one scope
// (program variables, or the quantified variables of a constraint system).

#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fpinv {

class VarTable {
public:
    int intern(const std::string& name) {
        auto it = index_.find(name);
        if (it != index_.end()) return it->second;
        int id = static_cast<int>(names_.size());
        names_.push_back(name);
        index_.emplace(name, id);
        return id;
    }

    int find(const std::string& name) const {
        auto it = index_.find(name);
        return it == index_.end() ? -1 : it->second;
    }

    const std::string& name(int id) const { return names_.at(static_cast<size_t>(id)); }
    int size() const { return static_cast<int>(names_.size()); }

private:
    std::vector<std::string> names_;
    std::map<std::string, int> index_;
};

} // namespace fpinv
