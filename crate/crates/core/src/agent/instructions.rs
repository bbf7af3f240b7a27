use crate::action::ActionKind;

/// Builds the system instructions sent at the start of every session.
pub fn build_instructions(extended_actions: bool) -> String {
    let mut out = String::new();
    out.push_str(
        "## Goal\n\
         You are reproducing a bug report against an Android app. Arriving at the screen the report talks about \
         does not count. The bug is reproduced only when the faulty behaviour it describes is actually observed, \
         for example a crash, an error message, or content that is missing or wrong.\n\n",
    );
    out.push_str(
        "## How we work\n\
         I start by sending the app name, the full bug report with its comments, and the UI of the first screen. \
         You answer with the next action, or with a few actions in order when they all apply to the current \
         screen. I run them and reply with what happened plus the UI of the resulting screen. This continues \
         until you decide the bug has been reproduced or that it cannot be.\n\n",
    );
    out.push_str(
        "## Screen descriptions\n\
         A screen starts with `Activity: <name>`. Each following `Group #N:` line lists widgets that belong \
         together, such as a row and the texts inside it. A widget is shown as `[Class: identifier]`, where the \
         identifier is its text, else its content description, else its resource id, else its centre point. \
         An `Ungrouped:` line lists visible texts that cannot be interacted with.\n\n",
    );
    out.push_str("## Actions\n");
    for kind in ActionKind::ALL {
        if !extended_actions && matches!(kind, ActionKind::Swipe | ActionKind::Rotate) {
            continue;
        }
        out.push_str(&format!("- {}: {}\n", usage(kind), meaning(kind)));
    }
    out.push_str(
        "\nA target is any identifier shown in the screen description, or a full label such as `[Button: OK]`.\n\n",
    );
    out.push_str(
        "## Reply format\n\
         Reply with exactly one list of actions. Each action is itself a list whose first element is the action \
         name and whose remaining elements are quoted strings or numbers. Examples:\n\
         [['click', 'Settings']]\n\
         [['set_text', 'email', 'someone@example.com'], ['set_text', 'password', 'secret1'], ['click', 'Sign in']]\n\
         [['long_click', 'Inbox'], ['sleep', 0.5]]\n\
         Put nothing else in square brackets. A short explanation outside the list is fine.\n\n",
    );
    out.push_str(
        "## Ending the session\n\
         - Reply [['success']] once the feedback or the screen shows the behaviour from the report, such as a \
         crash, an error, or missing or incorrect data.\n\
         - Reply [['fail']] when you are convinced the bug cannot be triggered, for example because the feature \
         the report needs does not exist in this app or every reasonable path has been tried.\n\
         Either one must be the last action of its list.\n\n",
    );
    out.push_str(
        "## Feedback\n\
         After each reply I state which actions ran, which one failed and why (later ones are then skipped), \
         texts that appeared only briefly, any crash log, whether the page changed, and a warning when your \
         actions repeat a recent sequence. Use it to adjust the next step.\n",
    );
    out
}

fn usage(kind: ActionKind) -> &'static str {
    match kind {
        ActionKind::Back => "['back']",
        ActionKind::Click => "['click', target]",
        ActionKind::LongClick => "['long_click', target]",
        ActionKind::Scroll => "['scroll', direction]",
        ActionKind::Swipe => "['swipe', direction]",
        ActionKind::Rotate => "['rotate', orientation]",
        ActionKind::SetText => "['set_text', target, text]",
        ActionKind::Restart => "['restart']",
        ActionKind::Sleep => "['sleep', seconds]",
        ActionKind::Success => "['success']",
        ActionKind::Fail => "['fail']",
    }
}

fn meaning(kind: ActionKind) -> &'static str {
    match kind {
        ActionKind::Back => "press the system back button",
        ActionKind::Click => "tap a widget",
        ActionKind::LongClick => "press and hold a widget",
        ActionKind::Scroll => "scroll the page; direction is up, down, left or right",
        ActionKind::Swipe => "swipe across the screen; direction is up, down, left or right",
        ActionKind::Rotate => "turn the device; orientation is landscape or portrait",
        ActionKind::SetText => "replace the content of an input field",
        ActionKind::Restart => "close the app and launch it again",
        ActionKind::Sleep => "wait, for instance to let a loading screen finish",
        ActionKind::Success => "the bug has been reproduced",
        ActionKind::Fail => "the bug cannot be reproduced",
    }
}
