import hypothesis

hypothesis.settings.register_profile(
    "suite",
    max_examples=150,
    deadline=None,
    derandomize=True,
)
hypothesis.settings.load_profile("suite")
