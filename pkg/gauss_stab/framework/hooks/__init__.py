from .certificate_tracking_hook import CertificateTrackingHook
