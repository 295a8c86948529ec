#pragma once

#include <string>
#include <vector>

namespace mcnest {

/// One chat message. Role is one of "system", "user", "assistant".
struct Message {
  std::string role;
  std::string content;
};

struct ModelRequest {
  std::vector<Message> messages;
  int max_tokens = 2048;
  double temperature = 0.7;
  std::string model_name;  // empty = client default
};

}  // namespace mcnest
