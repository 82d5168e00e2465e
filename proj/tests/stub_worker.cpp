// Scripted worker for protocol tests. Reads the start message from stdin,
// then replays a transcript file line by line, substituting {trial_id} and
// {fidelity}. Directives:
//   #sleep <ms>         pause
//   #exit <code>        exit immediately
//   #record <path>      write the received start line to <path>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <json.hpp>

namespace {

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: stub_worker <transcript>\n";
    return 2;
  }
  std::string start;
  if (!std::getline(std::cin, start)) return 4;
  const auto msg = nlohmann::json::parse(start);
  const std::string trial_id = msg.at("trial_id").get<std::string>();
  const std::string fidelity = std::to_string(msg.at("fidelity").get<int>());

  std::ifstream script(argv[1]);
  if (!script) {
    std::cerr << "cannot open " << argv[1] << '\n';
    return 2;
  }
  for (std::string line; std::getline(script, line);) {
    if (line.rfind("#sleep ", 0) == 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(std::stoi(line.substr(7))));
    } else if (line.rfind("#exit ", 0) == 0) {
      std::cout.flush();
      return std::stoi(line.substr(6));
    } else if (line.rfind("#record ", 0) == 0) {
      std::ofstream(line.substr(8)) << start << '\n';
    } else {
      replace_all(line, "{trial_id}", trial_id);
      replace_all(line, "{fidelity}", fidelity);
      std::cout << line << '\n' << std::flush;
    }
  }
  return 0;
}
