#include "acinv/verifier.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <regex>
#include <thread>

namespace acinv {

namespace {

constexpr std::size_t kOutputCap = 64 * 1024;

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    out += "'";
    return out;
}

}  // namespace

const char* verifier_status_name(VerifierResult::Status s) {
    switch (s) {
        case VerifierResult::Status::Pass: return "pass";
        case VerifierResult::Status::Fail: return "fail";
        case VerifierResult::Status::Error: return "error";
        case VerifierResult::Status::Timeout: return "timeout";
    }
    return "error";
}

VerifierResult run_external_verifier(const std::string& file, const std::string& command_template,
                                     std::chrono::milliseconds timeout,
                                     const std::string& pass_pattern) {
    VerifierResult result;

    const std::string placeholder = "{file}";
    if (command_template.find(placeholder) == std::string::npos) {
        result.output = "command template has no {file} placeholder";
        return result;
    }
    std::string cmd = command_template;
    for (std::size_t at = cmd.find(placeholder); at != std::string::npos;
         at = cmd.find(placeholder, at)) {
        const std::string quoted = shell_quote(file);
        cmd.replace(at, placeholder.size(), quoted);
        at += quoted.size();
    }

    int fds[2];
    if (pipe(fds) != 0) {
        result.output = std::string("pipe: ") + std::strerror(errno);
        return result;
    }
    pid_t pid = fork();
    if (pid < 0) {
        close(fds[0]);
        close(fds[1]);
        result.output = std::string("fork: ") + std::strerror(errno);
        return result;
    }
    if (pid == 0) {
        setpgid(0, 0);
        dup2(fds[1], 1);
        dup2(fds[1], 2);
        close(fds[0]);
        close(fds[1]);
        execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(fds[1]);
    fcntl(fds[0], F_SETFL, O_NONBLOCK);

    const auto deadline = std::chrono::steady_clock::now() + timeout;
    bool exited = false;
    bool timed_out = false;
    int status = 0;
    char buf[4096];
    while (true) {
        for (ssize_t n; (n = read(fds[0], buf, sizeof buf)) > 0;) {
            if (result.output.size() < kOutputCap) {
                result.output.append(buf, buf + std::min<std::size_t>(
                                                   n, kOutputCap - result.output.size()));
            }
        }
        if (!exited) {
            pid_t w = waitpid(pid, &status, WNOHANG);
            if (w == pid) {
                exited = true;
            } else if (std::chrono::steady_clock::now() >= deadline) {
                kill(-pid, SIGKILL);
                kill(pid, SIGKILL);
                waitpid(pid, &status, 0);
                exited = true;
                timed_out = true;
            }
        }
        if (exited) {
            // one last drain: the pipe may still hold buffered output
            ssize_t n;
            while ((n = read(fds[0], buf, sizeof buf)) > 0) {
                if (result.output.size() < kOutputCap) {
                    result.output.append(buf, buf + std::min<std::size_t>(
                                                       n, kOutputCap - result.output.size()));
                }
            }
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    close(fds[0]);

    if (timed_out) {
        result.status = VerifierResult::Status::Timeout;
        return result;
    }
    if (!WIFEXITED(status)) {
        result.status = VerifierResult::Status::Error;
        result.output += "\n[terminated by signal]";
        return result;
    }
    result.exit_code = WEXITSTATUS(status);
    if (result.exit_code == 126 || result.exit_code == 127) {
        result.status = VerifierResult::Status::Error;
        return result;
    }
    if (result.exit_code != 0) {
        result.status = VerifierResult::Status::Fail;
        return result;
    }
    if (!pass_pattern.empty() && !std::regex_search(result.output, std::regex(pass_pattern))) {
        result.status = VerifierResult::Status::Fail;
        return result;
    }
    result.status = VerifierResult::Status::Pass;
    return result;
}

}  // namespace acinv
