#include "pcsis/plugin.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <memory>
#include <mutex>
#include <sstream>

#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "pcsis/error.hpp"

namespace pcsis {

namespace {

// Child process speaking the line protocol over a socketpair.  A socket is
// used instead of pipes so writes to a dead child fail with EPIPE instead of
// raising SIGPIPE.
class PluginProcess {
public:
    explicit PluginProcess(const std::vector<std::string>& argv) {
        if (argv.empty()) throw UsageError("plugin: empty command");
        int fds[2];
        if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0)
            throw SimulationError(std::string("plugin: socketpair failed: ") + std::strerror(errno));

        pid_ = ::fork();
        if (pid_ < 0) {
            ::close(fds[0]);
            ::close(fds[1]);
            throw SimulationError(std::string("plugin: fork failed: ") + std::strerror(errno));
        }
        if (pid_ == 0) {
            ::close(fds[0]);
            ::dup2(fds[1], STDIN_FILENO);
            ::dup2(fds[1], STDOUT_FILENO);
            ::close(fds[1]);
            std::vector<char*> args;
            for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
            args.push_back(nullptr);
            ::execvp(args[0], args.data());
            std::_Exit(127);
        }
        ::close(fds[1]);
        fd_ = fds[0];
        command_ = argv.front();
    }

    PluginProcess(const PluginProcess&) = delete;
    PluginProcess& operator=(const PluginProcess&) = delete;

    ~PluginProcess() {
        if (fd_ >= 0) ::close(fd_);
        if (pid_ > 0) {
            int status = 0;
            ::waitpid(pid_, &status, 0);
        }
    }

    std::string exchange(const std::string& request) {
        std::lock_guard lock(mutex_);
        std::string line = request + '\n';
        const char* p = line.data();
        std::size_t left = line.size();
        while (left > 0) {
            ssize_t w = ::send(fd_, p, left, MSG_NOSIGNAL);
            if (w < 0) {
                if (errno == EINTR) continue;
                throw SimulationError("plugin '" + command_ + "': write failed: " + std::strerror(errno));
            }
            p += w;
            left -= static_cast<std::size_t>(w);
        }
        return read_line();
    }

private:
    std::string read_line() {
        for (;;) {
            auto nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                std::string out = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                return out;
            }
            char chunk[4096];
            ssize_t r = ::read(fd_, chunk, sizeof chunk);
            if (r < 0 && errno == EINTR) continue;
            if (r <= 0)
                throw SimulationError("plugin '" + command_ + "': process closed its output");
            buffer_.append(chunk, static_cast<std::size_t>(r));
        }
    }

    pid_t pid_ = -1;
    int fd_ = -1;
    std::string command_;
    std::string buffer_;
    std::mutex mutex_;
};

}  // namespace

std::string format_plugin_request(const StateVector& x, const ControlVector& u) {
    std::string out;
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        if (!out.empty()) out += ' ';
        out += buf;
    };
    for (Eigen::Index i = 0; i < x.size(); ++i) put(x[i]);
    for (Eigen::Index i = 0; i < u.size(); ++i) put(u[i]);
    return out;
}

StateVector parse_plugin_response(const std::string& line, int dimension) {
    std::istringstream is(line);
    StateVector y(dimension);
    for (int i = 0; i < dimension; ++i) {
        if (!(is >> y[i]))
            throw SimulationError("plugin: expected " + std::to_string(dimension) +
                                  " numbers, got '" + line + "'");
    }
    std::string extra;
    if (is >> extra) throw SimulationError("plugin: trailing data in response '" + line + "'");
    return y;
}

SystemModel plugin_system(const PluginSpec& spec) {
    auto process = std::make_shared<PluginProcess>(spec.argv);
    const int n = spec.dimension;
    auto step = [process, n](const StateVector& x, const ControlVector& u) {
        return parse_plugin_response(process->exchange(format_plugin_request(x, u)), n);
    };
    return SystemModel("plugin:" + spec.argv.front(), n, step, spec.safe_set, spec.control_set);
}

}  // namespace pcsis
