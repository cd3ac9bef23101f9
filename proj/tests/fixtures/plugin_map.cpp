// Test adapter for the plugin protocol.
//   plugin_map <n> half     y = 0.5 x + u (u padded with zeros)
//   plugin_map <n> identity y = x
//   plugin_map <n> escape   y = x + 10
//   plugin_map <n> nan      y = NaN
//   plugin_map <n> garbage  replies with text that is not a state

#include <cstdio>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    if (argc < 3) return 2;
    const int n = std::stoi(argv[1]);
    const std::string mode = argv[2];
    std::string line;
    while (std::getline(std::cin, line)) {
        std::istringstream is(line);
        std::vector<double> v;
        for (double d; is >> d;) v.push_back(d);
        if (static_cast<int>(v.size()) < n) return 3;
        if (mode == "garbage") {
            std::cout << "not a number\n" << std::flush;
            continue;
        }
        for (int k = 0; k < n; ++k) {
            double y = v[k];
            if (mode == "half") y = 0.5 * v[k] + (n + k < static_cast<int>(v.size()) ? v[n + k] : 0.0);
            else if (mode == "escape") y = v[k] + 10.0;
            else if (mode == "nan") y = std::numeric_limits<double>::quiet_NaN();
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", y);
            std::cout << (k ? " " : "") << buf;
        }
        std::cout << '\n' << std::flush;
    }
    return 0;
}
