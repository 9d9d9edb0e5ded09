// Credential workflow service. Configuration comes from REALCRED_* variables.

#include <pthread.h>

#include <csignal>
#include <cstdio>
#include <exception>
#include <thread>

#include "realcred/error.hpp"
#include "realcred/service.hpp"

int main() {
  using namespace realcred;
  // SIGINT/SIGTERM are taken synchronously by a waiter thread.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
  try {
    const auto config = ServiceConfig::from_env();
    CredentialService service(config);
    HttpServer server(service);
    const int port = server.bind(config.bind_host, config.port);
    std::printf("credserver listening on http://%s:%d (issuer %s, data %s)\n", config.bind_host.c_str(), port,
                service.issuer_did().c_str(),
                config.data_dir.empty() ? "in-memory" : config.data_dir.string().c_str());
    std::fflush(stdout);
    std::thread waiter([&] {
      int sig = 0;
      sigwait(&stop_signals, &sig);
      server.stop();
    });
    waiter.detach();
    server.serve();
  } catch (const Error& e) {
    std::fprintf(stderr, "credserver: %s: %s\n", std::string(to_string(e.code())).c_str(), e.detail().c_str());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "credserver: %s\n", e.what());
    return 1;
  }
  return 0;
}
