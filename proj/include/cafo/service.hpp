#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "cafo/failover.hpp"

namespace cafo {

inline constexpr int kProtocolVersion = 1;

using LineSink = std::function<void(const std::string&)>;

// Wire encoders, one JSON object per line, no trailing newline.
std::string frame_message(const std::string& session, const Grid& g);
std::string event_message(const std::string& session, const MonitorEvent& e);
std::string status_message(const std::string& session, bool running, double speed, const Session& s);
std::string error_message(const std::string& request, const std::string& text);

// One live session with its own stepping thread. Actions and controls take
// the session lock, so they land between generations.
class HostedSession {
public:
    HostedSession(std::string id, FailoverConfig cfg);
    ~HostedSession();
    HostedSession(const HostedSession&) = delete;
    HostedSession& operator=(const HostedSession&) = delete;

    const std::string& id() const { return id_; }

    // Sends status, the event backlog and the current frame to the new
    // subscriber first.
    int subscribe(LineSink sink);
    void unsubscribe(int token);

    // Empty on success, else the rejection text.
    std::string apply_action(const std::string& name, bool force);
    void play();
    void pause();
    // Steps n generations now (paused afterwards), emitting every event.
    void step(std::int64_t n);
    void set_speed(double gens_per_second);

    std::int64_t generation();
    bool running();
    // Runs f with the session locked.
    void inspect(const std::function<void(const Session&)>& f);

private:
    void loop();
    void publish_locked(bool frame);
    void broadcast(const std::string& line);
    void emit_status_locked();

    std::string id_;
    Session session_;
    std::mutex mu_;
    std::condition_variable cv_;
    bool running_ = false;
    bool stop_ = false;
    double speed_ = 60.0;
    std::size_t emitted_ = 0;
    std::int64_t last_frame_gen_ = -1;
    std::mutex sub_mu_;
    std::map<int, LineSink> subs_;
    int next_token_ = 1;
    std::thread thread_;
};

class SessionHost {
public:
    // config_ref: "builtin" or a path to an exported config JSON.
    std::string create_session(const std::string& config_ref = "builtin");
    std::shared_ptr<HostedSession> find(const std::string& id);
    bool close_session(const std::string& id);

private:
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<HostedSession>> sessions_;
    int next_id_ = 1;
};

// Per-connection protocol state: parses client lines and writes replies to
// `out`. The TCP server wraps one of these per socket.
class ProtocolHandler {
public:
    ProtocolHandler(SessionHost& host, LineSink out);
    ~ProtocolHandler();
    void handle_line(const std::string& line);
    const std::string& session_id() const { return session_; }

private:
    void attach(const std::string& id);
    void detach();

    SessionHost& host_;
    LineSink out_;
    std::string session_;
    std::shared_ptr<HostedSession> hosted_;
    int token_ = 0;
};

// Blocking TCP server speaking line-delimited JSON; returns when stop()
// is called from another thread.
class TcpServer {
public:
    TcpServer(SessionHost& host, std::string host_name, int port);
    ~TcpServer();
    // Binds and listens; returns the bound port (useful with port 0).
    int start();
    void serve();
    void stop();

private:
    SessionHost& host_;
    std::string host_name_;
    int port_;
    int fd_ = -1;
    std::atomic<bool> stop_{false};
};

}  // namespace cafo
