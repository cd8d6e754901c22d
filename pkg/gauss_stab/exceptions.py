class GaussStabError(Exception):
    """Base class of every error raised by gauss_stab.

    Scenario runs catch this class to record a failed stage
    without aborting the whole batch.
    """
