#include "fbcap/common.hpp"

#include <fstream>
#include <sstream>

namespace fbcap {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw input_error("cannot write file: " + path);
    out << content;
    if (!out) throw input_error("write failed: " + path);
}

}  // namespace fbcap
