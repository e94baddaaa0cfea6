#pragma once

// Default prompt templates, compiled in from prompts/*.txt.
namespace aerialnav::prompts {

extern const char* const q_loc;
extern const char* const q_plan;
extern const char* const q_imgn;
extern const char* const q_dm;
extern const char* const q_active;
extern const char* const q_verify;
extern const char* const language;

}  // namespace aerialnav::prompts
