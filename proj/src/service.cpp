#include "cafo/service.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace cafo {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

std::string frame_message(const std::string& session, const Grid& g) {
    json j;
    j["v"] = kProtocolVersion;
    j["type"] = "frame";
    j["session"] = session;
    j["generation"] = g.generation();
    j["width"] = g.width();
    j["height"] = g.height();
    j["rle"] = grid_to_rle(g);
    return j.dump();
}

std::string event_message(const std::string& session, const MonitorEvent& e) {
    json j;
    j["v"] = kProtocolVersion;
    j["type"] = "event";
    j["session"] = session;
    j["generation"] = e.generation;
    j["kind"] = event_kind_name(e.kind);
    j["section"] = e.section;
    if (!e.action.empty()) j["action"] = e.action;
    if (!e.detail.empty()) j["detail"] = e.detail;
    return j.dump();
}

std::string status_message(const std::string& session, bool running, double speed, const Session& s) {
    json j;
    j["v"] = kProtocolVersion;
    j["type"] = "status";
    j["session"] = session;
    j["state"] = running ? "running" : "paused";
    j["generation"] = s.generation();
    j["speed"] = speed;
    j["backup_role"] = s.role_of_backup() == BackupRole::Standby ? "Standby" : "ActingPrimary";
    j["next_reset_gen"] = s.next_reset_gen();
    return j.dump();
}

std::string error_message(const std::string& request, const std::string& text) {
    json j;
    j["v"] = kProtocolVersion;
    j["type"] = "error";
    j["request"] = request;
    j["message"] = text;
    return j.dump();
}

HostedSession::HostedSession(std::string id, FailoverConfig cfg) : id_(std::move(id)), session_(std::move(cfg)) {
    thread_ = std::thread([this] { loop(); });
}

HostedSession::~HostedSession() {
    {
        std::lock_guard<std::mutex> lock(mu_);
        stop_ = true;
    }
    cv_.notify_all();
    thread_.join();
}

void HostedSession::broadcast(const std::string& line) {
    std::lock_guard<std::mutex> lock(sub_mu_);
    for (auto& [token, sink] : subs_) sink(line);
}

void HostedSession::emit_status_locked() { broadcast(status_message(id_, running_, speed_, session_)); }

void HostedSession::publish_locked(bool frame) {
    const auto& ev = session_.events();
    if (ev.size() < emitted_) emitted_ = 0;  // init cleared the log
    for (; emitted_ < ev.size(); ++emitted_) broadcast(event_message(id_, ev[emitted_]));
    if (frame && last_frame_gen_ != session_.generation()) {
        broadcast(frame_message(id_, session_.grid()));
        last_frame_gen_ = session_.generation();
    }
}

int HostedSession::subscribe(LineSink sink) {
    std::lock_guard<std::mutex> lock(mu_);
    // flush pending events to existing subscribers; the newcomer gets the backlog
    publish_locked(false);
    sink(status_message(id_, running_, speed_, session_));
    for (const auto& e : session_.events()) sink(event_message(id_, e));
    sink(frame_message(id_, session_.grid()));
    std::lock_guard<std::mutex> sl(sub_mu_);
    int token = next_token_++;
    subs_[token] = std::move(sink);
    return token;
}

void HostedSession::unsubscribe(int token) {
    std::lock_guard<std::mutex> lock(sub_mu_);
    subs_.erase(token);
}

std::string HostedSession::apply_action(const std::string& name, bool force) {
    std::lock_guard<std::mutex> lock(mu_);
    try {
        if (name == "Init") {
            session_.init();
            emitted_ = 0;
        } else if (name == "KillPrimary") {
            session_.kill_primary();
        } else if (name == "ResetBackup") {
            session_.reset_backup(force);
        } else {
            return "unknown action '" + name + "'";
        }
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    last_frame_gen_ = -1;
    publish_locked(true);
    emit_status_locked();
    return {};
}

void HostedSession::play() {
    {
        std::lock_guard<std::mutex> lock(mu_);
        running_ = true;
        emit_status_locked();
    }
    cv_.notify_all();
}

void HostedSession::pause() {
    std::lock_guard<std::mutex> lock(mu_);
    running_ = false;
    publish_locked(true);
    emit_status_locked();
}

void HostedSession::step(std::int64_t n) {
    std::lock_guard<std::mutex> lock(mu_);
    running_ = false;
    for (std::int64_t i = 0; i < n; ++i) {
        session_.step(1);
        publish_locked(false);
    }
    publish_locked(true);
    emit_status_locked();
}

void HostedSession::set_speed(double gens_per_second) {
    {
        std::lock_guard<std::mutex> lock(mu_);
        speed_ = gens_per_second;
        emit_status_locked();
    }
    cv_.notify_all();
}

std::int64_t HostedSession::generation() {
    std::lock_guard<std::mutex> lock(mu_);
    return session_.generation();
}

bool HostedSession::running() {
    std::lock_guard<std::mutex> lock(mu_);
    return running_;
}

void HostedSession::inspect(const std::function<void(const Session&)>& f) {
    std::lock_guard<std::mutex> lock(mu_);
    f(session_);
}

void HostedSession::loop() {
    const auto frame_gap = std::chrono::milliseconds(33);
    auto last_frame = Clock::now();
    auto last_status = Clock::now();
    auto next_step = Clock::now();
    std::unique_lock<std::mutex> lock(mu_);
    while (!stop_) {
        if (!running_) {
            cv_.wait_for(lock, std::chrono::seconds(1), [&] { return stop_ || running_; });
            if (stop_) break;
            if (!running_) {
                emit_status_locked();
                continue;
            }
            next_step = Clock::now();
        }
        session_.step(1);
        auto now = Clock::now();
        bool frame = now - last_frame >= frame_gap;
        if (frame) last_frame = now;
        publish_locked(frame);
        if (now - last_status >= std::chrono::seconds(1)) {
            emit_status_locked();
            last_status = now;
        }
        if (speed_ > 0) {
            next_step += std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / speed_));
            if (next_step < now - std::chrono::seconds(1)) next_step = now;  // fell far behind
            cv_.wait_until(lock, next_step, [&] { return stop_ || !running_; });
        } else {
            // unpaced: let actions in between generations
            lock.unlock();
            std::this_thread::yield();
            lock.lock();
        }
    }
}

std::string SessionHost::create_session(const std::string& config_ref) {
    FailoverConfig cfg;
    if (config_ref.empty() || config_ref == "builtin") {
        cfg = default_config();
    } else {
        std::ifstream f(config_ref, std::ios::binary);
        if (!f) throw std::invalid_argument("unknown config '" + config_ref + "'");
        std::stringstream ss;
        ss << f.rdbuf();
        cfg = config_from_json(ss.str());
    }
    std::lock_guard<std::mutex> lock(mu_);
    std::string id = "s" + std::to_string(next_id_++);
    sessions_[id] = std::make_shared<HostedSession>(id, std::move(cfg));
    return id;
}

std::shared_ptr<HostedSession> SessionHost::find(const std::string& id) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

bool SessionHost::close_session(const std::string& id) {
    std::shared_ptr<HostedSession> gone;
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) return false;
        gone = it->second;
        sessions_.erase(it);
    }
    return true;
}

ProtocolHandler::ProtocolHandler(SessionHost& host, LineSink out) : host_(host), out_(std::move(out)) {}

ProtocolHandler::~ProtocolHandler() { detach(); }

void ProtocolHandler::detach() {
    if (hosted_) hosted_->unsubscribe(token_);
    hosted_.reset();
    session_.clear();
}

void ProtocolHandler::attach(const std::string& id) {
    detach();
    hosted_ = host_.find(id);
    if (!hosted_) throw std::invalid_argument("unknown session '" + id + "'");
    session_ = id;
    token_ = hosted_->subscribe(out_);
}

void ProtocolHandler::handle_line(const std::string& line) {
    std::string type = "?";
    try {
        json j = json::parse(line);
        if (!j.is_object()) throw std::invalid_argument("message must be a JSON object");
        if (j.contains("type") && j["type"].is_string()) type = j["type"].get<std::string>();
        int v = j.value("v", 0);
        if (v != kProtocolVersion)
            throw std::invalid_argument("unsupported protocol version " + std::to_string(v) + ", expected " +
                                        std::to_string(kProtocolVersion));
        if (type == "create") {
            std::string id = host_.create_session(j.value("config", std::string("builtin")));
            json r{{"v", kProtocolVersion}, {"type", "created"}, {"session", id}};
            out_(r.dump());
            attach(id);
            return;
        }
        if (type == "subscribe") {
            attach(j.at("session").get<std::string>());
            return;
        }
        if (!hosted_) throw std::invalid_argument("no session: send create or subscribe first");
        if (type == "action") {
            std::string name = j.at("name").get<std::string>();
            std::string err = hosted_->apply_action(name, j.value("force", false));
            if (!err.empty()) throw std::invalid_argument(name + " rejected: " + err);
            return;
        }
        if (type == "control") {
            std::string op = j.at("op").get<std::string>();
            if (op == "play") {
                hosted_->play();
            } else if (op == "pause") {
                hosted_->pause();
            } else if (op == "step") {
                auto n = j.value("n", std::int64_t{1});
                if (n < 0) throw std::invalid_argument("step n must be >= 0");
                hosted_->step(n);
            } else if (op == "speed") {
                double s = j.at("value").get<double>();
                if (s < 0) throw std::invalid_argument("speed must be >= 0");
                hosted_->set_speed(s);
            } else {
                throw std::invalid_argument("unknown control op '" + op + "'");
            }
            return;
        }
        throw std::invalid_argument("unknown message type '" + type + "'");
    } catch (const std::exception& e) {
        out_(error_message(type, e.what()));
    }
}

TcpServer::TcpServer(SessionHost& host, std::string host_name, int port)
    : host_(host), host_name_(std::move(host_name)), port_(port) {}

TcpServer::~TcpServer() {
    stop();
}

int TcpServer::start() {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    if (getaddrinfo(host_name_.c_str(), std::to_string(port_).c_str(), &hints, &res) != 0 || !res)
        throw std::runtime_error("cannot resolve " + host_name_);
    fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    int yes = 1;
    setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    if (fd_ < 0 || ::bind(fd_, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd_, 16) != 0) {
        freeaddrinfo(res);
        throw std::runtime_error("cannot listen on " + host_name_ + ":" + std::to_string(port_) + ": " +
                                 std::strerror(errno));
    }
    freeaddrinfo(res);
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    return port_;
}

void TcpServer::stop() {
    if (stop_.exchange(true)) return;
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
    }
}

namespace {

struct Client {
    int fd;
    std::mutex write_mu;
    bool write(const std::string& line) {
        std::lock_guard<std::mutex> lock(write_mu);
        std::string data = line + "\n";
        const char* p = data.data();
        std::size_t left = data.size();
        while (left > 0) {
            ssize_t n = ::send(fd, p, left, MSG_NOSIGNAL);
            if (n <= 0) return false;
            p += n;
            left -= static_cast<std::size_t>(n);
        }
        return true;
    }
};

void serve_client(SessionHost& host, int fd, const std::atomic<bool>& stop) {
    auto client = std::make_shared<Client>();
    client->fd = fd;
    {
        ProtocolHandler handler(host, [client](const std::string& line) { client->write(line); });
        std::string buf;
        char chunk[4096];
        while (!stop) {
            ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
            if (n <= 0) break;
            buf.append(chunk, static_cast<std::size_t>(n));
            std::size_t pos;
            while ((pos = buf.find('\n')) != std::string::npos) {
                std::string line = buf.substr(0, pos);
                buf.erase(0, pos + 1);
                if (!line.empty() && line.back() == '\r') line.pop_back();
                if (!line.empty()) handler.handle_line(line);
            }
        }
    }
    ::close(fd);
}

}  // namespace

void TcpServer::serve() {
    std::vector<std::thread> clients;
    std::vector<int> fds;
    while (!stop_) {
        int cfd = ::accept(fd_, nullptr, nullptr);
        if (cfd < 0) {
            if (stop_) break;
            continue;
        }
        fds.push_back(cfd);
        clients.emplace_back(serve_client, std::ref(host_), cfd, std::cref(stop_));
    }
    for (int cfd : fds) ::shutdown(cfd, SHUT_RDWR);
    for (auto& t : clients) t.join();
}

}  // namespace cafo
