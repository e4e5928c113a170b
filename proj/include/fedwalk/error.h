//
// Copyright 2026 The FedWalk Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef FEDWALK_ERROR_H_
#define FEDWALK_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fedwalk {

// Bad input data: unreadable files, malformed lines, out-of-range ids.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& source, std::size_t line,
             const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A structural invariant of the simulation was broken. Always a bug.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

#define FEDWALK_CHECK(cond, msg)                                        \
  do {                                                                  \
    if (!(cond)) {                                                      \
      throw ::fedwalk::InvariantError(std::string(__FILE__) + ":" +     \
                                      std::to_string(__LINE__) + ": " + \
                                      (msg));                           \
    }                                                                   \
  } while (false)

}  // namespace fedwalk

#endif  // FEDWALK_ERROR_H_
