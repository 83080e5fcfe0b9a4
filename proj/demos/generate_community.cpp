#include <cstdio>
#include <map>

#include "curvecast/synth.hpp"

// Generates a small synthetic community and prints what came out: the public
// profiles (some attributes censored), realized daily rates for one
// participant, and the first few events.

using namespace curvecast;

int main() {
  CommunityConfig cfg;
  cfg.n_couples = 3;
  cfg.days = 2;
  cfg.seed = 7;

  auto comm = generate_community(cfg);
  auto log = generate_events(comm, cfg);

  std::printf("profiles:\n");
  for (const auto& p : comm.profiles) std::printf("  %s\n", serialize_profile(p).c_str());

  const auto& first = comm.profiles.front();
  std::printf("\ndaily rates for %s:\n", first.id.c_str());
  for (int ch = 0; ch < kChannelCount; ++ch)
    std::printf("  %-14s %.3f\n", std::string(channel_name(static_cast<EventChannel>(ch))).c_str(),
                comm.behavior.at(first.id)[ch]);

  std::printf("\nfirst 10 of %zu events:\n", log.events.size());
  for (std::size_t i = 0; i < log.events.size() && i < 10; ++i)
    std::printf("  %s\n", serialize_event(log.events[i]).c_str());
  return 0;
}
