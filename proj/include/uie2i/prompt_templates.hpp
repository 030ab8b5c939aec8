#pragma once

// Prompt templates for the two-step synthesis protocol. Step 1 asks the model
// for five referring expressions per marked element; Step 2 turns those into
// parametrized first-person instructions.

#include <string_view>

namespace uie2i::prompts {

inline constexpr std::string_view kStep1Template = R"TPL(You are a screen UI expert. Here is a UI screenshot image with highlighted bounding boxes and corresponding labeled ID overlayed on bottom of them, and here is a list of corresponding UI element (icon/button/inputfield) box description within these bounding boxes. You should first ensure you understand the screenshot's status and every annotated UI element bounding box on it. Then output the updated element list with below template as JSON format.

NOTE: Ensure all referring exprression should UNIQUELY correspond to the element when generating them.

Here is the output template:
{
    "elements": [
        {
            "id": "<copy corresponding labeled ID on the bottom of element>", 
            "shortDescription": "<copy from given input list>",
            "fullDescription": "<a comprehensive description that explains the function of the element and the expected outcome when interacting with it>",
            "explicitRefer": "<a referring expression that explicitly refers to the element, from a computer user's first perspective>", 
            "implicitReferByElementFunction": "<a referring expression that does NOT explicitly refer to this element content or obvious visual feature, but implicitly refers to it by its function in the whole page or expected outcome after interacting with it>",
            "implicitReferByNearElement": "<a referring expression that does NOT explicitly refer to this element content or obvious visual feature, but implicitly refers to it by its relationship with near elements or emphasizes it from similar elements by spatial order>"
        }
    ]
})TPL";

inline constexpr std::string_view kStep2Template = R"TPL(You are a computer expert user. You will be given a UI element list from a UI screenshot which includes elements and their referring expressions as shown in the following input template. You should simulate a user using the UI screenshot, generate possible action type and action content, then generate instructions for every element according to the given element referring expressions, as shown in the following output template. Return as JSON format.

NOTE:

1. For inputfield element type, the generated instruction should contain the possible input content from a computer user's first perspective. For example, "fill James as last name", "enter Boeing747 in search field", "select article in recent six months".

2. Ensure all instruction should UNIQUELY correspond to the element when generating them.

Here is the input template:
{
    "elements": [
        {
            "id": "<copy corresponding labeled ID on the bottom of element>", 
            "shortDescription": "<a short description about the element, including element type and element content>",
            "fullDescription": "<a comprehensive description that explains the function of the element and the expected outcome when interacting with it>",
            "explicitRefer": "<a referring expression that explicitly refers to the element, from a computer user's first perspective>", 
            "implicitReferByElementFunction": "<a referring expression that does NOT explicitly refer to this element content or obvious visual feature, but implicitly refers to it by its function in the whole page or expected outcome after interacting with it>",
            "implicitReferByNearElement": "<a referring expression that does NOT explicitly refer to this element content or obvious visual feature, but implicitly refers to it by its relationship with near elements or emphasizes it from similar elements by spatial order>"
        }
    ]
}

Here is the output template:

{
    "elements": [
        {
            "id": "<copy corresponding labeled ID on the bottom of element>", 
            "shortDescription": "<copy from given input list>",
            "instructionArgs": {
                "actionType": "<choose appropriate action type>",
                "actionContentDescription": "<describe what is the possible action content about. if CLICK: leave empty string. if TYPE: specific input content which is appropriate for current UI screenshot. if Toggle, Checkbox and Switch, ON or OFF>",
                "actionContent": "<According to `actionContentDescription` to fill the specific content, if CLICK: leave empty string>"
            },
            "convertedUserInstructionByElementFunction": "<including above `actionContent` if not empty, convert above `implicitReferByElementFunction` into a computer user's first perspective instruction, concise and less than 15 words>",
            "convertedUserInstructionByNearElement": "<including above `actionContent` if not empty, convert above `implicitReferByNearElement` into a computer user's first perspective instruction, concise and less than 15 words>"
        }
    ]
})TPL";

}  // namespace uie2i::prompts
